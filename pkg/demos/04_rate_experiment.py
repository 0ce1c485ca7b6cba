"""
Convergence rates on graded meshes
==================================

The experiment driver solves on a hierarchy ``T_0, ..., T_n`` and measures
the difference between consecutive solutions.  With the right grading the
differences shrink like ``2**(-2 j)`` (rate 2 for k = 1); on quasi-uniform
meshes the corner singularity slows this down.

Run with ``python demos/04_rate_experiment.py [LEVELS]`` (default 5, about
ten seconds; the acceptance suite uses 7).
"""
# %%
import sys

from axistokes import ExperimentConfig, run_experiment

levels = int(sys.argv[1]) if len(sys.argv) > 1 else 5

for kappa in (0.2, 0.5):
    cfg = ExperimentConfig(domain="omega1", k=1, kappa=kappa, levels=levels, data="paper",
                           t0="coarse")
    report = run_experiment(cfg)
    print(f"\nomega1, kappa = {kappa}")
    print(report.table.to_markdown(), end="")
    print("unknowns:", [lv["n_unknowns"] for lv in report.metadata["levels"]])

# %%
# ``kappa="auto"`` derives the factor from the corner exponent.
report = run_experiment(ExperimentConfig(domain="omega2", kappa="auto", levels=levels, t0="coarse"))
print(f"\nomega2, kappa = auto ({report.metadata['kappa']:.4f})")
print(report.table.to_markdown(), end="")
