"""Mean-value L^p norms and exact space-time norms of free evolutions.

For a finite mode sum the long-interval average of |f|^p (even p) is a tuple
sum over index combinations with matching sums; grouping the p/2-fold
coefficient products by their index sum turns it into a sum of squared group
totals, which is exact, manifestly nonnegative, and O(M^(p/2)).

The windowed space-time norm of a free evolution carries one time integral
per tuple, evaluated in closed form through phi1(z) = (e^z - 1)/z; the
globally averaged norm keeps only tuples whose dispersive phases cancel
exactly, decided in exact field arithmetic whenever the lattice allows it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import budget as _budget
from .errors import NumericConsistencyError
from .evolution import DispersionSymbol
from .kernels import group_boundaries, pack_rows, phi1
from .trigpoly import TrigPoly, multiply

__all__ = [
    "MixedNormSpec",
    "mean_value",
    "mean_value_numeric",
    "lp_norm_exact",
    "lp_norm_numeric",
    "mixed_norm_free",
    "windowed_product_norm_sq",
    "global_product_norm_sq",
    "fit_exponent",
    "FitResult",
    "predicted_exponent",
    "ExponentPrediction",
]

RESONANCE_FLOAT_TOL = 1e-10
IMAG_RESIDUE_TOL = 1e-12


@dataclass(frozen=True)
class MixedNormSpec:
    """Even integrability p plus the time mode: [0,T] window or global mean."""

    p: int = 4
    time_mode: str = "window"
    T: float | None = None

    def __post_init__(self):
        if self.p not in (2, 4, 6):
            raise ValueError("p must be one of 2, 4, 6")
        if self.time_mode not in ("window", "global"):
            raise ValueError("time_mode must be 'window' or 'global'")
        if self.time_mode == "window":
            if self.T is None or not self.T > 0:
                raise ValueError("windowed mode needs T > 0")


# -- mean value ------------------------------------------------------------------


def mean_value(f: TrigPoly) -> complex:
    """Long-interval average of f: the zero-index coefficient, exactly."""
    return f.coeff((0,) * f.spec.rank)


def mean_value_numeric(f: TrigPoly, L: float, points: int = 200_001) -> complex:
    """Trapezoid average over [-L, L]; cross-validates the exact mean."""
    xs = np.linspace(-L, L, points)
    vals = f.evaluate(xs)
    re = np.trapezoid(vals.real, xs) / (2 * L)
    im = np.trapezoid(vals.imag, xs) / (2 * L)
    return complex(re, im)


# -- exact mean L^p norms (even p) ---------------------------------------------------


def lp_norm_exact(f: TrigPoly, p: int, budget: int | None = None) -> float:
    """Mean L^p norm via matched index tuples; p in {2, 4, 6}."""
    if p == 2:
        return f.l2_norm()
    if p not in (4, 6):
        raise ValueError("exact mean norms are available for p in {2, 4, 6}")
    if not f:
        return 0.0
    g = multiply(f, f, budget=budget)
    if p == 4:
        _, gv = g.as_arrays()
        total = float((gv.real**2 + gv.imag**2).sum())
        return total ** (1.0 / 4.0)
    _budget.check_memory(len(g) * len(f), what="triple-sum table")
    h = multiply(g, f, budget=budget)
    _, hv = h.as_arrays()
    total = float((hv.real**2 + hv.imag**2).sum())
    return total ** (1.0 / 6.0)


def _tuple_sum_gap(lam: np.ndarray, k: int, budget: int | None) -> float:
    """Smallest positive spacing among k-fold frequency sums (0 if none)."""
    _budget.check(len(lam) ** k, budget, what="tuple-sum spacing scan")
    sums = lam
    for _ in range(k - 1):
        sums = (sums[:, None] + lam[None, :]).ravel()
    sums = np.sort(sums)
    d = np.diff(sums)
    d = d[d > 1e-12]
    return float(d.min()) if len(d) else 0.0


def lp_norm_numeric(
    f: TrigPoly,
    p: int,
    L: float | None = None,
    min_points_per_period: int = 8,
    budget: int | None = None,
) -> float:
    """Quadrature estimate of the mean L^p norm over [-L, L]; the independent
    check for ``lp_norm_exact``.

    Without an explicit L the window is sized from the smallest spacing of
    p/2-fold frequency sums, which controls the slowest surviving oscillation
    of |f|^p.
    """
    if f.spec.d != 1:
        raise ValueError("numeric mean norms require d = 1")
    if not f:
        return 0.0
    lam = f.freqs_float()
    max_lam = max(1.0, float(np.abs(lam).max()))
    if L is None:
        gap = _tuple_sum_gap(lam, max(1, p // 2), budget)
        L = 1e4 / gap if gap > 0 else 1e3
    step = 2 * math.pi / (min_points_per_period * max_lam)
    n = int(2 * L / step) + 2
    _budget.check(n, budget, what="quadrature grid")
    xs = np.linspace(-L, L, n)
    vals = np.abs(f.evaluate(xs)) ** p
    mean = float(np.trapezoid(vals, xs) / (2 * L))
    return mean ** (1.0 / p)


# -- space-time norms of free evolutions ------------------------------------------------


def evolved_factor_data(f: TrigPoly, symbol: DispersionSymbol, conjugated: bool = False):
    """Per-mode data of one product factor: (indices, coefficients, phase
    rates, exact phase keys).  A conjugated factor carries negated indices,
    conjugated coefficients, and negated rates."""
    poly = f.conj() if conjugated else f
    idx, vals = poly.as_arrays()
    rates = symbol.phase_rates(poly)
    keys = symbol.phase_rate_keys(poly)
    if conjugated:
        rates = -rates
        if isinstance(keys, np.ndarray):
            keys = -keys
        elif keys is not None:
            keys = [(-a, -b) for a, b in keys]
    return idx, vals, rates, keys


def _fold_tuple_data(datas, budget):
    """Combine per-factor mode data into tuple data (index sums, products,
    phase-rate sums, exact keys).  Entries with identical index sum and
    identical exact phase are merged along the way."""
    have_keys = all(d[3] is not None for d in datas)
    array_keys = have_keys and all(isinstance(d[3], np.ndarray) for d in datas)

    acc_idx, acc_val, acc_rate, acc_key = datas[0]
    if have_keys and not array_keys:
        acc_key = list(acc_key)
    work = len(acc_val)
    for idx, vals, rates, keys in datas[1:]:
        work *= len(vals)
        _budget.check(work, budget, what="tuple enumeration")
        _budget.check_memory(len(acc_val) * len(vals), what="tuple table")
        m, r = len(acc_val), acc_idx.shape[1]
        new_idx = (acc_idx[:, None, :] + idx[None, :, :]).reshape(-1, r)
        new_val = (acc_val[:, None] * vals[None, :]).ravel()
        new_rate = (acc_rate[:, None] + rates[None, :]).ravel()
        if have_keys:
            if array_keys:
                new_key = (acc_key[:, None, :] + keys[None, :, :]).reshape(-1, 2)
            else:
                new_key = [
                    (ka[0] + kb[0], ka[1] + kb[1]) for ka in acc_key for kb in keys
                ]
        else:
            new_key = None
        # merge exact duplicates to keep structured inputs compact
        if array_keys:
            packed = pack_rows(new_idx)
            order = np.lexsort((new_key[:, 1], new_key[:, 0], packed))
            packed, new_idx = packed[order], new_idx[order]
            new_val, new_rate, new_key = new_val[order], new_rate[order], new_key[order]
            same = (
                (packed[1:] == packed[:-1])
                & (new_key[1:, 0] == new_key[:-1, 0])
                & (new_key[1:, 1] == new_key[:-1, 1])
            )
            cuts = np.flatnonzero(np.r_[True, ~same])
            new_idx, new_rate, new_key = new_idx[cuts], new_rate[cuts], new_key[cuts]
            new_val = np.add.reduceat(new_val, cuts)
        acc_idx, acc_val, acc_rate, acc_key = new_idx, new_val, new_rate, new_key
    return acc_idx, acc_val, acc_rate, acc_key


def windowed_product_norm_sq(polys, symbol, T, budget=None) -> float:
    """Integral over [0, T] of the squared mean L^2 norm of the product of the
    free evolutions of ``polys``; exact up to roundoff."""
    polys = list(polys)
    if any(not f for f in polys):
        return 0.0
    datas = [evolved_factor_data(f, symbol) for f in polys]
    idx, val, rate, _ = _fold_tuple_data(datas, budget)
    packed = pack_rows(idx)
    order = np.argsort(packed, kind="stable")
    packed, val, rate = packed[order], val[order], rate[order]
    cuts = group_boundaries(packed)
    bounds = np.r_[cuts, len(packed)]
    sizes = np.diff(bounds)
    _budget.check(int((sizes.astype(np.int64) ** 2).sum()), budget, what="windowed tuple pairing")
    T = float(T)
    total = 0.0 + 0.0j
    singles = sizes == 1
    if singles.any():
        v = val[bounds[:-1][singles]]
        total += ((v.real**2 + v.imag**2) * T).sum()
    for i in np.flatnonzero(~singles):
        lo, hi = bounds[i], bounds[i + 1]
        v = val[lo:hi]
        r = rate[lo:hi]
        integ = T * phi1(1j * T * (r[:, None] - r[None, :]))
        total += (v[:, None] * v[None, :].conj() * integ).sum()
    re, im = float(total.real), float(total.imag)
    if abs(im) > IMAG_RESIDUE_TOL * max(abs(re), 1e-300):
        raise NumericConsistencyError(
            f"windowed tuple sum has imaginary residue {im:.3e} against {re:.3e}"
        )
    return re


def global_product_norm_sq(polys, symbol, budget=None) -> float:
    """Global time-mean of the squared mean L^2 norm of the evolved product:
    only exactly phase-matched tuples survive the averaging."""
    polys = list(polys)
    if any(not f for f in polys):
        return 0.0
    datas = [evolved_factor_data(f, symbol) for f in polys]
    idx, val, rate, key = _fold_tuple_data(datas, budget)
    packed = pack_rows(idx)
    if isinstance(key, np.ndarray):
        order = np.lexsort((key[:, 1], key[:, 0], packed))
        packed, val, key = packed[order], val[order], key[order]
        same = (
            (packed[1:] == packed[:-1])
            & (key[1:, 0] == key[:-1, 0])
            & (key[1:, 1] == key[:-1, 1])
        )
        cuts = np.flatnonzero(np.r_[True, ~same])
        sums = np.add.reduceat(val, cuts)
        return float((sums.real**2 + sums.imag**2).sum())
    if key is not None:
        groups: dict = {}
        for p, k, v in zip(packed.tolist(), key, val.tolist()):
            kk = (p, k[0], k[1])
            groups[kk] = groups.get(kk, 0.0) + v
        return float(sum(abs(v) ** 2 for v in groups.values()))
    # float fallback: cluster rates within each index-sum group
    order = np.lexsort((rate, packed))
    packed, val, rate = packed[order], val[order], rate[order]
    new_group = np.r_[
        True, (packed[1:] != packed[:-1]) | (np.diff(rate) > RESONANCE_FLOAT_TOL)
    ]
    cuts = np.flatnonzero(new_group)
    sums = np.add.reduceat(val, cuts)
    return float((sums.real**2 + sums.imag**2).sum())


def mixed_norm_free(
    f: TrigPoly,
    symbol: DispersionSymbol,
    mspec: MixedNormSpec,
    budget: int | None = None,
) -> float:
    """Space-time norm of the free evolution of f.

    Windowed mode: the L^p([0,T], mean-L^p) norm, evaluated exactly through
    per-tuple time integrals.  Global mode: the mean over all of time-space,
    the resonant-diagonal sum.
    """
    if f.spec.d != 1:
        raise ValueError("mixed norms are implemented for d = 1")
    p = mspec.p
    if p == 2:
        if mspec.time_mode == "window":
            return math.sqrt(mspec.T) * f.l2_norm()
        return f.l2_norm()
    k = p // 2
    if mspec.time_mode == "window":
        total = windowed_product_norm_sq([f] * k, symbol, mspec.T, budget)
    else:
        total = global_product_norm_sq([f] * k, symbol, budget)
    return max(total, 0.0) ** (1.0 / p)


# -- exponent fitting and the predicted loss -----------------------------------------------


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    residual: float


def fit_exponent(points) -> FitResult:
    """Least squares on (log parameter, log value); residual is the RMS misfit."""
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 3:
        raise ValueError("need at least 3 points to fit an exponent")
    if any(x <= 0 or y <= 0 for x, y in pts):
        raise ValueError("log-log fit needs positive data")
    lx = np.log([x for x, _ in pts])
    ly = np.log([y for _, y in pts])
    A = np.stack([lx, np.ones_like(lx)], axis=1)
    sol, *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - A @ sol
    return FitResult(float(sol[0]), float(sol[1]), float(np.sqrt(np.mean(resid**2))))


@dataclass(frozen=True)
class ExponentPrediction:
    s_star: Fraction
    alpha: Fraction
    p_critical: Fraction

    def as_floats(self) -> tuple[float, float, float]:
        return float(self.s_star), float(self.alpha), float(self.p_critical)


def predicted_exponent(p, d: int, b) -> ExponentPrediction:
    """Closed-form regularity threshold s*(p, d, b) and the decoupling loss
    alpha(p) with its critical exponent p_d = 2(d+2)/d.

    s* = b (1/2 - 1/p) + max(d/2 - (d+2)/p, 0); alpha vanishes below p_d and
    equals d/2 - (d+2)/p above.  p = inf is accepted as the limit.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    b = Fraction(b)
    p_d = Fraction(2 * (d + 2), d)
    if p == math.inf:
        inv_p = Fraction(0)
    else:
        p = Fraction(p)
        if p <= 2:
            raise ValueError("p must exceed 2")
        inv_p = 1 / p
    curvature_term = Fraction(d, 2) - (d + 2) * inv_p
    s_star = b * (Fraction(1, 2) - inv_p) + max(curvature_term, Fraction(0))
    if p != math.inf and p < p_d:
        alpha = Fraction(0)
    else:
        alpha = curvature_term
    return ExponentPrediction(s_star, alpha, p_d)
