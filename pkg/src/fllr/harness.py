"""Monte Carlo experiments around the local linear estimator.

Everything here is plain library code; the command line front end lives in
:mod:`fllr.cli`. Results are merged in a fixed ``(n, h, scheme)`` order so
that runs with the same configuration are bit-reproducible.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, FLLRError, NoRoot, SelectionFailed
from .estimator import local_linear_fit, nadaraya_watson_fit
from .hilbert import FunctionalSample, distances
from .kernels import KernelSpec, by_name
from .local_operator import LocalFactorization, build_factorization
from .regularization import KINDS, PENALIZATION, TRUNCATION, RegScheme
from .small_ball import EmpiricalF, estimate_v
from .synthetic import (KLSpec, RegressionSpec, a4_diagnostic, eval_m, gen_dataset,
                        sample_kl, smooth_x0, true_rho)

logger = logging.getLogger(__name__)

NW = "nadaraya_watson"
HOLDOUT_SEED_OFFSET = 1_000_003


# ---------------------------------------------------------------------------
# configuration

@dataclass(frozen=True)
class SchemePolicy:
    """A grid entry: a fixed scheme, a bandwidth-driven policy, or NW.

    ``policy="rn_h"`` ties the conditioning index to the bandwidth,
    ``r_n = rn_scale * h``: truncation keeps every ``mu_j >= r_n mu_1``,
    penalization uses ``alpha = r_n mu_1`` and Tikhonov ``alpha = r_n mu_1^2``.
    ``policy="rho"`` (penalization only) uses ``alpha = h F_hat(h)``.
    """

    kind: str
    N: int | None = None
    alpha: float | None = None
    policy: str | None = None
    rn_scale: float = 1.0

    def __post_init__(self):
        if self.kind != NW and self.kind not in KINDS:
            raise ConfigError(f"unknown scheme kind {self.kind!r}")
        if self.policy not in (None, "rn_h", "rho"):
            raise ConfigError(f"unknown scheme policy {self.policy!r}")
        if self.policy == "rho" and self.kind != PENALIZATION:
            raise ConfigError("the rho policy is only defined for penalization")
        if self.kind != NW and self.policy is None:
            try:
                self.fixed()
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc

    def fixed(self) -> RegScheme:
        if self.kind == TRUNCATION:
            return RegScheme.truncation(self.N)
        return RegScheme(self.kind, alpha=self.alpha)

    @property
    def label(self) -> str:
        if self.kind == NW:
            return NW
        if self.policy is None:
            return self.fixed().label
        if self.policy == "rho":
            return "penalization(alpha=h*F(h))"
        return f"{self.kind}(r_n={self.rn_scale:g}*h)"

    def resolve(self, f: LocalFactorization, h: float,
                fhat: float | None = None) -> RegScheme | None:
        if self.kind == NW:
            return None
        if self.policy is None:
            return self.fixed()
        if self.policy == "rho":
            if fhat is None:
                raise ValueError("rho policy needs F_hat(h)")
            return RegScheme.penalization(h * fhat)
        rn = self.rn_scale * h
        if self.kind == TRUNCATION:
            return RegScheme.truncation(max(1, int(np.sum(f.eigenvalues >= rn * f.mu1))))
        if self.kind == PENALIZATION:
            return RegScheme.penalization(rn * f.mu1)
        return RegScheme.tikhonov(rn * f.mu1 ** 2)

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}

    @classmethod
    def from_dict(cls, d: dict) -> "SchemePolicy":
        try:
            return cls(d["kind"], d.get("N"), d.get("alpha"), d.get("policy"),
                       float(d.get("rn_scale", 1.0)))
        except KeyError as exc:
            raise ConfigError(f"scheme entry missing {exc}") from exc


def make_x0(kl: KLSpec, rule: str = "zero", scale: float = 1.0) -> np.ndarray:
    """Evaluation point by rule.

    ``zero``: the mean curve. ``smooth``: ``scale * lambda_k^(3/2)``, which
    keeps the Gaussian smoothness sum finite. ``rough``: ``scale *
    lambda_k^(1/2)``, a point as rough as a typical draw.
    """
    if rule == "zero":
        return np.zeros(kl.d)
    if rule == "smooth":
        return smooth_x0(kl, scale)
    if rule == "rough":
        return scale * np.sqrt(kl.eigenvalues)
    raise ConfigError(f"unknown x0 rule {rule!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    kl: KLSpec
    reg: RegressionSpec
    n_grid: tuple
    h_grid: tuple
    schemes: tuple
    replicates: int = 100
    seed: int = 0
    x0_rule: str = "zero"
    x0_scale: float = 1.0
    kernel: str = "naive"
    holdout: int = 100_000
    output: str | None = None

    def __post_init__(self):
        if not self.n_grid or not self.h_grid or not self.schemes:
            raise ConfigError("n_grid, h_grid and schemes must be nonempty")
        if self.replicates < 1:
            raise ConfigError("replicates must be at least 1")
        if any(int(n) < 1 for n in self.n_grid) or any(not h > 0 for h in self.h_grid):
            raise ConfigError("sample sizes and bandwidths must be positive")
        make_x0(self.kl, self.x0_rule, self.x0_scale)
        try:
            by_name(self.kernel)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def x0(self) -> np.ndarray:
        return make_x0(self.kl, self.x0_rule, self.x0_scale)

    @property
    def kernel_spec(self) -> KernelSpec:
        return by_name(self.kernel)

    def to_dict(self) -> dict:
        return {
            "kl": self.kl.to_dict(),
            "reg": self.reg.to_dict(),
            "x0": {"rule": self.x0_rule, "scale": self.x0_scale},
            "kernel": self.kernel,
            "n_grid": [int(n) for n in self.n_grid],
            "h_grid": [float(h) for h in self.h_grid],
            "schemes": [s.to_dict() for s in self.schemes],
            "replicates": self.replicates,
            "seed": self.seed,
            "holdout": self.holdout,
            "output": self.output,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        try:
            x0 = d.get("x0", {})
            return cls(
                kl=KLSpec.from_dict(d["kl"]),
                reg=RegressionSpec.from_dict(d["reg"]),
                n_grid=tuple(int(n) for n in d["n_grid"]),
                h_grid=tuple(float(h) for h in d["h_grid"]),
                schemes=tuple(SchemePolicy.from_dict(s) for s in d["schemes"]),
                replicates=int(d.get("replicates", 100)),
                seed=int(d.get("seed", 0)),
                x0_rule=x0.get("rule", "zero"),
                x0_scale=float(x0.get("scale", 1.0)),
                kernel=d.get("kernel", "naive"),
                holdout=int(d.get("holdout", 100_000)),
                output=d.get("output"),
            )
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed config: {exc}") from exc
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def digest(self) -> str:
        payload = dict(self.to_dict(), output=None)
        text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()[:16]


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return ExperimentConfig.from_dict(raw)


# ---------------------------------------------------------------------------
# Monte Carlo MSE

@dataclass(frozen=True)
class MseRow:
    n: int
    h: float
    scheme: str
    replicates: int
    failures: int
    mse: float
    bias2: float
    variance: float
    mean_weight_sum: float
    mean_active: float
    cov_bv: float
    cov_bv_se: float
    valid: bool


def _moments(errors: np.ndarray):
    mean = float(np.mean(errors))
    mse = float(np.mean(errors ** 2))
    var = float(np.mean((errors - mean) ** 2))
    return mse, mean * mean, var


def _covariance(a: np.ndarray, b: np.ndarray):
    if a.size < 2:
        return float("nan"), float("nan")
    prod = (a - a.mean()) * (b - b.mean())
    return float(prod.mean()), float(prod.std(ddof=1) / np.sqrt(a.size))


def _replicate(cfg: ExperimentConfig, n: int, rep: int):
    """All fits of one replicate; entries follow the (h, scheme) grid order."""
    kern, x0 = cfg.kernel_spec, cfg.x0
    m0 = eval_m(cfg.reg, x0)
    sample = gen_dataset(cfg.kl, cfg.reg, n, cfg.seed + rep)
    m_x = eval_m(cfg.reg, sample.inputs)
    eps = sample.outputs - m_x
    fhat = EmpiricalF.from_sample(sample, x0)
    out = []
    for h in cfg.h_grid:
        try:
            f = build_factorization(sample, x0, kern, h)
        except FLLRError:
            out.extend([None] * len(cfg.schemes))
            continue
        for pol in cfg.schemes:
            try:
                s = pol.resolve(f, h, fhat(h))
                if s is None:
                    fit = nadaraya_watson_fit(sample, x0, kern, h)
                else:
                    fit = local_linear_fit(sample, x0, kern, h, s, factorization=f,
                                           with_gradient=False)
            except FLLRError:
                out.append(None)
                continue
            w = fit.weights
            t_b = float((m_x - m0) @ w) / fit.weight_sum
            t_v = float(eps @ w) / fit.weight_sum
            out.append((fit.estimate - m0, t_b, t_v, fit.weight_sum, fit.active_count))
    return out


def run_mse(cfg: ExperimentConfig, workers: int = 1) -> list[MseRow]:
    """Replicated fits at ``x0`` for every ``(n, h, scheme)`` cell.

    Replicate ``r`` uses dataset seed ``cfg.seed + r`` for every cell, so
    bandwidths and schemes are compared on common random numbers. Failed
    fits are counted and excluded; a cell with no successful fit is emitted
    with ``valid=False``.
    """
    a4 = a4_diagnostic(cfg.x0, cfg.kl)
    logger.info("x0 smoothness sum: %.4g", a4)
    tasks = [(n, r) for n in cfg.n_grid for r in range(cfg.replicates)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            results = list(ex.map(_replicate, [cfg] * len(tasks),
                                  [t[0] for t in tasks], [t[1] for t in tasks]))
    else:
        results = [_replicate(cfg, n, r) for n, r in tasks]

    rows = []
    ncell = len(cfg.h_grid) * len(cfg.schemes)
    for ni, n in enumerate(cfg.n_grid):
        block = results[ni * cfg.replicates:(ni + 1) * cfg.replicates]
        for c in range(ncell):
            h = cfg.h_grid[c // len(cfg.schemes)]
            pol = cfg.schemes[c % len(cfg.schemes)]
            ok = [rep[c] for rep in block if rep[c] is not None]
            fails = cfg.replicates - len(ok)
            if not ok:
                nan = float("nan")
                rows.append(MseRow(n, h, pol.label, 0, fails, nan, nan, nan, nan, nan,
                                   nan, nan, False))
                continue
            arr = np.array(ok, dtype=float)
            mse, bias2, var = _moments(arr[:, 0])
            cov, cov_se = _covariance(arr[:, 1], arr[:, 2])
            rows.append(MseRow(n, h, pol.label, len(ok), fails, mse, bias2, var,
                               float(arr[:, 3].mean()), float(arr[:, 4].mean()),
                               cov, cov_se, True))
    return rows


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def rows_to_csv(rows: Sequence, header_comment: str | None = None) -> str:
    """Render dataclass rows as CSV text with an optional ``#`` comment line."""
    buf = io.StringIO()
    if header_comment:
        buf.write(f"# {header_comment}\n")
    if not rows:
        return buf.getvalue()
    names = [f.name for f in fields(rows[0])]
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    for r in rows:
        w.writerow([_fmt(getattr(r, k)) for k in names])
    return buf.getvalue()


def config_comment(cfg: ExperimentConfig) -> str:
    return f"seed={cfg.seed} config_sha256={cfg.digest()}"


# ---------------------------------------------------------------------------
# theoretical bound and bandwidth

@dataclass(frozen=True)
class BoundTerms:
    total: float
    bias_line: float
    variance_line: float
    nF_large: bool


def theorem_bound(h: float, n: int, Fhat: float, vhat: float, r_n: float,
                  C: float = 1.0) -> BoundTerms:
    """Mean square error bound, split into its bias and variance lines.

    ``bias = C [h^6/r^2 + h^4 + h^2/(nF) + v^2/F^2]`` and
    ``variance = C/(nF) [1 + h^2/(n r v) + v/(r F)]``.
    """
    for name, val in (("h", h), ("n", n), ("Fhat", Fhat), ("vhat", vhat), ("r_n", r_n)):
        if not val > 0:
            raise ValueError(f"{name} must be positive, got {val}")
    nF = n * Fhat
    bias = C * (h ** 6 / r_n ** 2 + h ** 4 + h ** 2 / nF + vhat ** 2 / Fhat ** 2)
    variance = C / nF * (1.0 + h ** 2 / (n * r_n * vhat) + vhat / (r_n * Fhat))
    return BoundTerms(bias + variance, bias, variance, nF >= 10.0)


def solve_hstar(n: float, F_fn: Callable, h_max: float = 1.0, rtol: float = 1e-10) -> float:
    """Bandwidth solving ``h^4 F(h) = 1/n`` by bisection on ``(0, h_max]``."""
    target = 1.0 / n

    def g(h):
        return h ** 4 * float(F_fn(h)) - target

    lo, hi = h_max * 1e-12, float(h_max)
    g_lo, g_hi = g(lo), g(hi)
    if not (g_lo < 0 <= g_hi):
        raise NoRoot(lo, hi, g_lo, g_hi)
    if g_hi == 0:
        return hi
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if g(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class BoundRow:
    n: int
    h: float
    F_hat: float
    v_hat: float
    r_n: float
    bias_line: float
    variance_line: float
    bound: float
    mse: float
    ratio: float


def holdout_sample(cfg: ExperimentConfig) -> FunctionalSample:
    X = sample_kl(cfg.kl, cfg.holdout, seed=cfg.seed + HOLDOUT_SEED_OFFSET)
    return FunctionalSample(X, np.zeros(cfg.holdout))


def bound_table(cfg: ExperimentConfig, mse_rows: Sequence[MseRow] = ()) -> tuple[list[BoundRow], float]:
    """Bound at ``C = 1`` over the ``(n, h)`` grid with ``r_n = h``.

    ``F_hat`` and ``v_hat`` come from a held-out sample of curves. When MSE
    rows are supplied, the ratio ``mse / bound`` is reported and the largest
    ratio over the grid is returned as a fitted constant (``nan`` otherwise).
    """
    hold = holdout_sample(cfg)
    x0, kern = cfg.x0, cfg.kernel_spec
    F = EmpiricalF.from_sample(hold, x0)
    rho_fn = true_rho(cfg.kl)
    best = {}
    for r in mse_rows:
        if r.valid:
            key = (r.n, round(r.h, 12))
            best[key] = min(best.get(key, np.inf), r.mse)
    out = []
    for n in cfg.n_grid:
        for h in cfg.h_grid:
            fh = F(h)
            try:
                vh = estimate_v(hold, x0, kern, h, rho_fn)
            except FLLRError:
                vh = 0.0
            if fh <= 0 or vh <= 0:
                nan = float("nan")
                out.append(BoundRow(n, h, fh, vh, h, nan, nan, nan, nan, nan))
                continue
            t = theorem_bound(h, n, fh, vh, h)
            mse = best.get((n, round(h, 12)), float("nan"))
            out.append(BoundRow(n, h, fh, vh, h, t.bias_line, t.variance_line, t.total,
                                mse, mse / t.total))
    ratios = [r.ratio for r in out if np.isfinite(r.ratio)]
    return out, (max(ratios) if ratios else float("nan"))


# ---------------------------------------------------------------------------
# cross-validation

@dataclass(frozen=True)
class CVResult:
    h: float
    scheme: RegScheme
    score: float
    table: list


def _tie_key(h: float, s: RegScheme):
    if s.kind == TRUNCATION:
        return (h, KINDS.index(s.kind), -s.N)
    return (h, KINDS.index(s.kind), s.alpha)


def cv_select(sample: FunctionalSample, k: KernelSpec, h_grid, scheme_grid) -> CVResult:
    """Leave-one-out selection of ``(h, scheme)``.

    Each curve ``X_i`` is predicted from the other curves with ``X_i`` as the
    evaluation point; a failed fit makes that cell's score infinite. Ties go
    to the smaller ``h``, then the smaller ``alpha`` or the larger ``N``.
    """
    if sample.n < 10:
        raise ValueError("cross-validation needs at least 10 observations")
    h_grid = [float(h) for h in h_grid]
    scheme_grid = list(scheme_grid)
    scores = np.zeros((len(h_grid), len(scheme_grid)))
    for i in range(sample.n):
        rest = sample.drop(i)
        xi, yi = sample.inputs[i], sample.outputs[i]
        for a, h in enumerate(h_grid):
            try:
                f = build_factorization(rest, xi, k, h)
            except FLLRError:
                scores[a, :] = np.inf
                continue
            for b, s in enumerate(scheme_grid):
                if not np.isfinite(scores[a, b]):
                    continue
                try:
                    est = local_linear_fit(rest, xi, k, h, s, factorization=f,
                                           with_gradient=False).estimate
                except FLLRError:
                    scores[a, b] = np.inf
                    continue
                scores[a, b] += (yi - est) ** 2
    table = [(h, s, float(scores[a, b])) for a, h in enumerate(h_grid)
             for b, s in enumerate(scheme_grid)]
    finite = [t for t in table if np.isfinite(t[2])]
    if not finite:
        raise SelectionFailed("every (h, scheme) cell failed in leave-one-out")
    h, s, score = min(finite, key=lambda t: (t[2],) + _tie_key(t[0], t[1]))
    return CVResult(h, s, score, table)


# ---------------------------------------------------------------------------
# bias rates

@dataclass(frozen=True)
class RateReport:
    slope_bias2_ll: float
    slope_bias2_nw: float
    slope_abs_ll: float
    slope_abs_nw: float
    difference: float
    filtered: int


def _loglog_slope(h: np.ndarray, v: np.ndarray) -> float:
    return float(np.polyfit(np.log(h), np.log(v), 1)[0])


def rate_slopes(h, bias_ll, bias_nw) -> RateReport:
    """Log-log slopes of squared bias against ``h`` for LL and NW.

    ``difference`` compares the ``|bias|`` slopes (half the squared ones).
    Points with a zero bias are dropped and counted in ``filtered``.
    """
    h = np.asarray(h, dtype=float)
    b2_ll = np.asarray(bias_ll, dtype=float) ** 2
    b2_nw = np.asarray(bias_nw, dtype=float) ** 2
    if np.unique(h).size < 3:
        raise ValueError("need at least three distinct bandwidths")
    if h.max() / h.min() < 4:
        logger.warning("bandwidths span only a factor %.2f", h.max() / h.min())
    keep = (b2_ll > 0) & (b2_nw > 0) & (h > 0)
    if keep.sum() < 3:
        raise ValueError("fewer than three usable points after filtering")
    s_ll = _loglog_slope(h[keep], b2_ll[keep])
    s_nw = _loglog_slope(h[keep], b2_nw[keep])
    return RateReport(s_ll, s_nw, s_ll / 2, s_nw / 2, (s_ll - s_nw) / 2,
                      int((~keep).sum()))


@dataclass(frozen=True)
class BiasRow:
    h: float
    min_active: int
    bias_ll: float
    bias_nw: float


def bias_slope_experiment(kl: KLSpec, reg: RegressionSpec, x0, k: KernelSpec, n: int,
                          multipliers: Sequence[float], policy: SchemePolicy,
                          replicates: int = 5, seed: int = 0, min_active: int = 50):
    """Noiseless bias of LL and NW over a bandwidth grid ``multipliers * h0``.

    ``h0`` is calibrated so the smallest bandwidth holds at least
    ``min_active`` curves in every replicate. Biases are averaged over
    ``replicates`` designs (seeds ``seed + r``), shared by both estimators.
    """
    if reg.noise_sigma != 0:
        raise ValueError("bias slopes are measured on noiseless data")
    x0 = np.asarray(x0, dtype=float)
    m0 = eval_m(reg, x0)
    samples = [gen_dataset(kl, reg, n, seed + r) for r in range(replicates)]
    kth = [np.sort(distances(s, x0))[min_active - 1] for s in samples]
    h0 = max(kth) * (1 + 1e-9) / min(multipliers)
    rows = []
    for mult in multipliers:
        h = mult * h0
        ll, nw, act = [], [], []
        for s in samples:
            f = build_factorization(s, x0, k, h)
            fit = local_linear_fit(s, x0, k, h, policy.resolve(f, h), factorization=f,
                                   with_gradient=False)
            ll.append(fit.estimate - m0)
            nw.append(nadaraya_watson_fit(s, x0, k, h).estimate - m0)
            act.append(f.active_count)
        rows.append(BiasRow(h, int(min(act)), float(np.mean(ll)), float(np.mean(nw))))
    report = rate_slopes([r.h for r in rows], [r.bias_ll for r in rows],
                         [r.bias_nw for r in rows])
    return rows, report
