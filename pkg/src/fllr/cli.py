"""Command line front end: ``fllr <subcommand> ...``.

Exit status is 0 on success, 2 for configuration or input errors and 3 for
numerical failures inside the library.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .errors import ConfigError, FLLRError
from .estimator import gradient_estimate, local_linear_fit, nadaraya_watson_fit
from .harness import (bias_slope_experiment, bound_table,
                      config_comment, cv_select, load_config, rows_to_csv, run_mse)
from .hilbert import read_curve_csv, read_dataset_csv, write_dataset_csv
from .kernels import by_name, read_kernel_table
from .regularization import RegScheme
from .small_ball import (EmpiricalF, LOG_SQUARED, POLY_EXP, check_gamma_limit,
                         fit_family, rho)
from .synthetic import gen_dataset

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def _kernel(text: str):
    if Path(text).suffix == ".csv" or Path(text).exists():
        return read_kernel_table(text)
    return by_name(text)


def parse_scheme(text: str) -> RegScheme | None:
    """``nw``, ``truncation:N``, ``penalization:alpha`` or ``tikhonov:alpha``."""
    if text in ("nw", "nadaraya_watson"):
        return None
    kind, _, value = text.partition(":")
    if not value:
        raise ConfigError(f"scheme {text!r} needs a parameter, e.g. penalization:1e-3")
    try:
        if kind == "truncation":
            return RegScheme.truncation(int(value))
        return RegScheme(kind, alpha=float(value))
    except ValueError as exc:
        raise ConfigError(f"bad scheme {text!r}: {exc}") from exc


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise ConfigError(f"expected comma separated numbers, got {text!r}") from exc


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True, default=float))


def _x0(args, d: int) -> np.ndarray:
    if args.x0_file:
        x0 = read_curve_csv(args.x0_file)
        if x0.size != d:
            raise ConfigError(f"x0 has {x0.size} coordinates, data has {d}")
        return x0
    return np.zeros(d)


# ---------------------------------------------------------------------------
# subcommands

def cmd_simulate(args) -> None:
    cfg = load_config(args.config)
    n = args.n or cfg.n_grid[0]
    seed = cfg.seed if args.seed is None else args.seed
    sample = gen_dataset(cfg.kl, cfg.reg, n, seed)
    out = args.output or "-"
    comment = f"seed={seed} config_sha256={cfg.digest()}"
    write_dataset_csv(sys.stdout if out == "-" else out, sample, comment=comment)


def cmd_fit(args) -> None:
    sample = read_dataset_csv(args.data)
    x0 = _x0(args, sample.d)
    k = _kernel(args.kernel)
    s = parse_scheme(args.scheme)
    if s is None:
        fit = nadaraya_watson_fit(sample, x0, k, args.h)
    else:
        fit = local_linear_fit(sample, x0, k, args.h, s)
    rec = fit.to_record()
    if s is not None and args.gradient:
        rec["gradient"] = gradient_estimate(sample, fit).tolist()
    _json(rec)


def cmd_cv(args) -> None:
    sample = read_dataset_csv(args.data)
    schemes = [parse_scheme(t) for t in args.schemes.split(",")]
    if any(s is None for s in schemes):
        raise ConfigError("cross-validation grids take regularized schemes only")
    res = cv_select(sample, _kernel(args.kernel), _floats(args.h_grid), schemes)
    _json({
        "h": res.h,
        "scheme": res.scheme.to_dict(),
        "score": res.score,
        "table": [{"h": h, "scheme": s.label, "score": sc} for h, s, sc in res.table],
    })


def cmd_mse(args) -> None:
    cfg = load_config(args.config)
    rows = run_mse(cfg, workers=args.workers)
    _emit(rows_to_csv(rows, config_comment(cfg)), args.output or cfg.output)


def cmd_smallball(args) -> None:
    sample = read_dataset_csv(args.data)
    x0 = _x0(args, sample.d)
    e = EmpiricalF.from_sample(sample, x0)
    grid = np.quantile(e.sorted_norms, np.linspace(0.02, 0.5, args.points))
    fit = fit_family(e, args.family)
    lines = [f"# n={e.n} family={args.family} residual={fit.residual_norm!r}",
             "h,F_hat,F_family"]
    lines += [f"{float(h)!r},{float(e(h))!r},{float(fit.family(h))!r}" for h in grid]
    _emit("\n".join(lines) + "\n", args.output)
    fam = fit.family
    report = {"family": asdict(fam), "residual_norm": fit.residual_norm}
    if fam.C2 > 0:
        # the limit is only meaningful where s - rho(s) stays a positive radius
        s_grid = [float(np.quantile(e.sorted_norms, q)) for q in (0.05, 0.02, 0.01)]
        s_grid = [v for v in s_grid if v > 0 and float(rho(fam, v)) < v]
        if s_grid:
            report["gamma_limit"] = check_gamma_limit(
                lambda h: fam.log_F(h), lambda v: rho(fam, v), s_grid,
                [-1.0, 0.0, 1.0], log_scale=True)
        else:
            report["gamma_limit"] = "not evaluated: rho(s) >= s on the sample radii"
    out = sys.stderr if not args.output else sys.stdout
    print(json.dumps(report, indent=2, sort_keys=True, default=float), file=out)


def cmd_rates(args) -> None:
    cfg = load_config(args.config)
    pol = cfg.schemes[0]
    if pol.kind == "nadaraya_watson":
        raise ConfigError("the first scheme of the config is the LL policy for rates")
    mults = _floats(args.multipliers)
    rows, rep = bias_slope_experiment(cfg.kl, cfg.reg, cfg.x0, cfg.kernel_spec,
                                      cfg.n_grid[0], mults, pol, cfg.replicates,
                                      cfg.seed, args.min_active)
    text = rows_to_csv(rows, config_comment(cfg))
    _emit(text, args.output or cfg.output)
    print(json.dumps(asdict(rep), indent=2, sort_keys=True), file=sys.stderr)


def cmd_bound(args) -> None:
    cfg = load_config(args.config)
    mse_rows = run_mse(cfg, workers=args.workers) if args.with_mse else ()
    rows, c_fit = bound_table(cfg, mse_rows)
    comment = f"{config_comment(cfg)} C=1 fitted_C={c_fit!r}"
    _emit(rows_to_csv(rows, comment), args.output)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fllr", description="Local linear regression on curves.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="emit a synthetic dataset CSV")
    s.add_argument("--config", required=True)
    s.add_argument("--n", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("fit", help="one estimate at x0")
    s.add_argument("--data", required=True)
    s.add_argument("--x0-file")
    s.add_argument("--h", type=float, required=True)
    s.add_argument("--kernel", default="naive")
    s.add_argument("--scheme", default="penalization:1e-6")
    s.add_argument("--gradient", action="store_true")
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("cv", help="leave-one-out grid selection")
    s.add_argument("--data", required=True)
    s.add_argument("--kernel", default="naive")
    s.add_argument("--h-grid", required=True)
    s.add_argument("--schemes", required=True)
    s.set_defaults(func=cmd_cv)

    s = sub.add_parser("mse", help="Monte Carlo MSE table from a config")
    s.add_argument("--config", required=True)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_mse)

    s = sub.add_parser("smallball", help="small ball probability table and fit")
    s.add_argument("--data", required=True)
    s.add_argument("--x0-file")
    s.add_argument("--family", choices=[POLY_EXP, LOG_SQUARED], default=LOG_SQUARED)
    s.add_argument("--points", type=int, default=20)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_smallball)

    s = sub.add_parser("rates", help="noiseless bias slopes, LL against NW")
    s.add_argument("--config", required=True)
    s.add_argument("--multipliers", default="0.8,1.0,1.2,1.5,1.9")
    s.add_argument("--min-active", type=int, default=50)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_rates)

    s = sub.add_parser("bound", help="mean square error bound table")
    s.add_argument("--config", required=True)
    s.add_argument("--with-mse", action="store_true")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_bound)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (ConfigError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"fllr: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FLLRError as exc:
        print(f"fllr: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"fllr: invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
