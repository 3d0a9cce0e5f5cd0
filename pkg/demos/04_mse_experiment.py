"""A small Monte Carlo study driven by a JSON config, plus the bound table.

Equivalent to ``fllr mse --config demos/config_small.json`` and
``fllr bound --config demos/config_small.json --with-mse``.
"""

from pathlib import Path

from fllr import EmpiricalF, bound_table, load_config, run_mse, solve_hstar
from fllr.harness import config_comment, holdout_sample, rows_to_csv

cfg = load_config(Path(__file__).with_name("config_small.json"))
rows = run_mse(cfg)
print(rows_to_csv(rows, config_comment(cfg)))

bounds, C = bound_table(cfg, rows)
print(f"largest mse / bound ratio on this grid (fitted constant): {C:.4f}")

F = EmpiricalF.from_sample(holdout_sample(cfg), cfg.x0)
for n in cfg.n_grid:
    print(f"n={n}: bandwidth solving h^4 F(h) = 1/n is {solve_hstar(n, F, h_max=2.0):.4f}")
