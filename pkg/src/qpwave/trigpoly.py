"""Sparse trigonometric polynomials on a frequency lattice.

Coefficients live on finitely many integer indices; the function they
represent is the finite sum of e^{i <frequency(n), x>} times the coefficient.
Stored form is canonical: no zero coefficients, and after float arithmetic
coefficients below 1e-15 of the largest magnitude are dropped as rounding
dust.  All operations return new objects; nothing mutates in place.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import budget as _budget
from .errors import DegenerateExtremizerError
from .kernels import group_sum
from .lattice import LatticeSpec

__all__ = [
    "TrigPoly",
    "SobolevSpec",
    "multiply",
    "project_height",
    "project_freq",
    "project_cube",
    "sobolev_norm",
    "extremizer",
]

PRUNE_REL = 1e-15


@dataclass(frozen=True)
class SobolevSpec:
    """Regularity weight: (1+|n|)^(2s), optionally times e^(2 kappa |n|)."""

    s: float
    kappa: float = 0.0

    def __post_init__(self):
        if self.kappa < 0:
            raise ValueError("kappa must be >= 0")


class TrigPoly:
    __slots__ = ("spec", "_coeffs", "_cache")

    def __init__(self, spec: LatticeSpec, coeffs, prune: bool = False):
        cleaned: dict[tuple[int, ...], complex] = {}
        items = coeffs.items() if isinstance(coeffs, dict) else coeffs
        for n, c in items:
            n = spec.check_index(n)
            c = complex(c)
            if c != 0:
                cleaned[n] = cleaned.get(n, 0.0) + c
        cleaned = {n: c for n, c in cleaned.items() if c != 0}
        if prune and cleaned:
            top = max(abs(c) for c in cleaned.values())
            cut = PRUNE_REL * top
            cleaned = {n: c for n, c in cleaned.items() if abs(c) >= cut}
        object.__setattr__(self, "spec", spec)
        object.__setattr__(self, "_coeffs", cleaned)
        object.__setattr__(self, "_cache", {})

    def __setattr__(self, name, value):
        raise AttributeError("TrigPoly is immutable")

    # -- constructors -----------------------------------------------------------

    @classmethod
    def zero(cls, spec: LatticeSpec) -> "TrigPoly":
        return cls(spec, {})

    @classmethod
    def single(cls, spec: LatticeSpec, n, c=1.0) -> "TrigPoly":
        return cls(spec, {tuple(n): c})

    @classmethod
    def from_arrays(cls, spec, idx: np.ndarray, coeffs: np.ndarray, prune=False):
        return cls(spec, zip(map(tuple, np.asarray(idx, dtype=np.int64).tolist()),
                             coeffs.tolist()), prune=prune)

    # -- access -------------------------------------------------------------------

    def coeff(self, n) -> complex:
        return self._coeffs.get(tuple(n), 0.0)

    @property
    def support(self):
        return self._coeffs.keys()

    def items(self):
        return self._coeffs.items()

    def __len__(self) -> int:
        return len(self._coeffs)

    def __bool__(self) -> bool:
        return bool(self._coeffs)

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """(indices, coefficients) in lexicographic index order (deterministic)."""
        got = self._cache.get("arrays")
        if got is None:
            if self._coeffs:
                keys = sorted(self._coeffs)
                idx = np.array(keys, dtype=np.int64)
                vals = np.array([self._coeffs[k] for k in keys], dtype=complex)
            else:
                idx = np.zeros((0, self.spec.rank), dtype=np.int64)
                vals = np.zeros(0, dtype=complex)
            got = (idx, vals)
            self._cache["arrays"] = got
        return got

    def freqs_float(self) -> np.ndarray:
        got = self._cache.get("freqs")
        if got is None:
            idx, _ = self.as_arrays()
            got = self.spec.freq_float(idx)
            self._cache["freqs"] = got
        return got

    def heights_sq(self) -> np.ndarray:
        idx, _ = self.as_arrays()
        return (idx * idx).sum(axis=1)

    # -- linear algebra -------------------------------------------------------------

    def _check_same_spec(self, other: "TrigPoly"):
        if self.spec != other.spec:
            raise ValueError("operands live on different lattices")

    def __add__(self, other):
        if not isinstance(other, TrigPoly):
            return NotImplemented
        self._check_same_spec(other)
        out = dict(self._coeffs)
        for n, c in other._coeffs.items():
            out[n] = out.get(n, 0.0) + c
        return TrigPoly(self.spec, out, prune=True)

    def __sub__(self, other):
        if not isinstance(other, TrigPoly):
            return NotImplemented
        return self + (-other)

    def __neg__(self):
        return TrigPoly(self.spec, {n: -c for n, c in self._coeffs.items()})

    def __mul__(self, other):
        if isinstance(other, TrigPoly):
            return multiply(self, other)
        return TrigPoly(self.spec, {n: c * other for n, c in self._coeffs.items()})

    def __rmul__(self, other):
        return self.__mul__(other)

    def conj(self) -> "TrigPoly":
        """Complex conjugate: coefficient at n becomes conj(coefficient at -n)."""
        return TrigPoly(
            self.spec,
            {tuple(-x for x in n): c.conjugate() for n, c in self._coeffs.items()},
        )

    def shift(self, m) -> "TrigPoly":
        m = self.spec.check_index(m)
        return TrigPoly(
            self.spec,
            {tuple(a + b for a, b in zip(n, m)): c for n, c in self._coeffs.items()},
        )

    # -- norms ------------------------------------------------------------------------

    def l2_norm(self) -> float:
        if not self._coeffs:
            return 0.0
        _, vals = self.as_arrays()
        return float(np.sqrt((vals.real**2 + vals.imag**2).sum()))

    def is_real_valued(self, tol: float = 1e-12) -> bool:
        scale = max((abs(c) for c in self._coeffs.values()), default=0.0)
        for n, c in self._coeffs.items():
            m = tuple(-x for x in n)
            if abs(self._coeffs.get(m, 0.0) - c.conjugate()) > tol * max(scale, 1.0):
                return False
        return True

    def evaluate(self, xs: np.ndarray) -> np.ndarray:
        """Pointwise values on a 1-d sample grid (d = 1 only)."""
        if self.spec.d != 1:
            raise ValueError("evaluate requires d = 1")
        xs = np.asarray(xs, dtype=float)
        idx, vals = self.as_arrays()
        lam = self.freqs_float()
        out = np.zeros(xs.shape, dtype=complex)
        # chunk modes to bound the (modes x samples) temporary
        step = max(1, int(4_000_000 / max(len(xs), 1)))
        for k in range(0, len(vals), step):
            out += vals[k : k + step] @ np.exp(1j * np.outer(lam[k : k + step], xs))
        return out

    # -- JSON ---------------------------------------------------------------------------

    def to_dict(self) -> dict:
        rows = [
            {"n": list(n), "re": float(c.real), "im": float(c.imag)}
            for n, c in sorted(self._coeffs.items())
        ]
        return {"spec": self.spec.to_dict(), "coeffs": rows}

    @classmethod
    def from_dict(cls, obj: dict) -> "TrigPoly":
        spec = LatticeSpec.from_dict(obj["spec"])
        coeffs = {
            tuple(int(x) for x in row["n"]): complex(row.get("re", 0.0), row.get("im", 0.0))
            for row in obj["coeffs"]
        }
        return cls(spec, coeffs)

    def __repr__(self):
        return f"TrigPoly({len(self._coeffs)} modes on rank-{self.spec.rank} lattice)"


# -- lattice convolution ------------------------------------------------------------------


def multiply(f: TrigPoly, g: TrigPoly, budget: int | None = None) -> TrigPoly:
    """Pointwise product of the represented functions: convolution of coefficients."""
    f._check_same_spec(g)
    if not f or not g:
        return TrigPoly.zero(f.spec)
    fi, fv = f.as_arrays()
    gi, gv = g.as_arrays()
    work = len(fv) * len(gv)
    _budget.check(work, budget, what="coefficient convolution")
    sums = (fi[:, None, :] + gi[None, :, :]).reshape(-1, f.spec.rank)
    vals = (fv[:, None] * gv[None, :]).ravel()
    idx, out = group_sum(sums, vals)
    return TrigPoly.from_arrays(f.spec, idx, out, prune=True)


# -- projections ------------------------------------------------------------------------------


def project_height(f: TrigPoly, C: int) -> TrigPoly:
    """Keep the coefficients whose index height lies in the dyadic shell of C."""
    if C < 1 or (C & (C - 1)) != 0:
        raise ValueError(f"shell parameter must be a dyadic integer >= 1, got {C}")
    kept = {}
    for n, c in f.items():
        h2 = sum(x * x for x in n)
        if (h2 <= 1) if C == 1 else (4 * h2 > C * C and h2 <= C * C):
            kept[n] = c
    return TrigPoly(f.spec, kept)


def project_ball(f: TrigPoly, radius: float) -> TrigPoly:
    """Keep indices with Euclidean height <= radius (Galerkin truncation)."""
    r2 = float(radius) * float(radius)
    return TrigPoly(f.spec, {n: c for n, c in f.items() if sum(x * x for x in n) <= r2})


def _abs_freq_shell_test(spec, n, lam_float, N, margin):
    """|frequency| in (N/2, N] (N=1: <= 1), decided exactly on the boundary."""
    a = abs(lam_float)
    lo, hi = (0.0, 1.0) if N == 1 else (N / 2.0, float(N))
    if a < hi - margin and (N == 1 or a > lo + margin):
        return True
    if a > hi + margin or (N != 1 and a < lo - margin):
        return False
    if spec.exact and spec.d == 1:
        lam = abs(spec.freq1(n))
        if N == 1:
            return lam <= 1
        return lam > Fraction(N, 2) and lam <= N
    # float mode: sharp comparison
    if N == 1:
        return a <= hi
    return lo < a <= hi


def project_freq(f: TrigPoly, N: int) -> TrigPoly:
    """Keep coefficients with |frequency| in the dyadic band (N/2, N] (N=1: <= 1)."""
    if N < 1 or (N & (N - 1)) != 0:
        raise ValueError(f"band parameter must be a dyadic integer >= 1, got {N}")
    idx, vals = f.as_arrays()
    if len(idx) == 0:
        return TrigPoly.zero(f.spec)
    lam = f.freqs_float()
    if f.spec.d == 1:
        margin = 1e-9 * (1.0 + N)
        kept = {
            tuple(int(x) for x in idx[k]): vals[k]
            for k in range(len(idx))
            if _abs_freq_shell_test(f.spec, tuple(idx[k]), lam[k], N, margin)
        }
        return TrigPoly(f.spec, kept)
    mag = np.sqrt((lam * lam).sum(axis=1))
    keep = (mag <= 1.0) if N == 1 else ((mag > N / 2.0) & (mag <= float(N)))
    return TrigPoly.from_arrays(f.spec, idx[keep], vals[keep])


def project_cube(f: TrigPoly, a, C: float) -> TrigPoly:
    """Keep indices within Euclidean distance C of the center index a."""
    a = f.spec.check_index(a)
    c2 = float(C) * float(C)
    kept = {
        n: v
        for n, v in f.items()
        if sum((x - y) * (x - y) for x, y in zip(n, a)) <= c2
    }
    return TrigPoly(f.spec, kept)


# -- weighted norms ------------------------------------------------------------------------------


def sobolev_norm(f: TrigPoly, spec: SobolevSpec | float) -> float:
    """Weighted coefficient norm: sqrt of sum (1+|n|)^(2s) e^(2 kappa |n|) |c|^2."""
    if not isinstance(spec, SobolevSpec):
        spec = SobolevSpec(float(spec))
    if not f:
        return 0.0
    _, vals = f.as_arrays()
    h = np.sqrt(f.heights_sq().astype(float))
    w = (1.0 + h) ** (2.0 * spec.s)
    if spec.kappa:
        w = w * np.exp(2.0 * spec.kappa * h)
    return float(np.sqrt((w * (vals.real**2 + vals.imag**2)).sum()))


# -- the concentration family ---------------------------------------------------------------------


def extremizer(spec: LatticeSpec, C: int, budget: int | None = None) -> TrigPoly:
    """Unit coefficients on shell-C indices whose frequency has modulus <= 1.

    For rank >= 2 the last coordinate can always be chosen to bring the
    frequency into [-1, 1], so the family has about C^(rank-1) modes; this is
    the data that saturates the height-loss in the dispersive estimates.
    """
    if spec.d != 1:
        raise ValueError("extremizer requires d = 1")
    if spec.rank < 2:
        raise ValueError("extremizer requires rank >= 2")
    if C < 1 or (C & (C - 1)) != 0:
        raise ValueError(f"shell parameter must be a dyadic integer >= 1, got {C}")
    r = spec.rank
    w = spec.float_omega(0)
    w_last = w[-1]
    per_row = int(2.0 / w_last) + 3
    _budget.check((2 * C + 1) ** (r - 1) * per_row, budget, what="extremizer enumeration")

    axes = [np.arange(-C, C + 1, dtype=np.int64)] * (r - 1)
    mesh = np.meshgrid(*axes, indexing="ij") if r > 1 else []
    head = np.stack([m.ravel() for m in mesh], axis=1)
    partial = head @ w[:-1]
    kmin = np.ceil((-1.0 - partial) / w_last).astype(np.int64) - 1
    kmax = np.floor((1.0 - partial) / w_last).astype(np.int64) + 1
    counts = np.maximum(kmax - kmin + 1, 0)
    rows = np.repeat(np.arange(len(head)), counts)
    offsets = np.concatenate([np.arange(c) for c in counts]) if counts.sum() else np.zeros(0, int)
    ks = kmin[rows] + offsets
    idx = np.concatenate([head[rows], ks[:, None]], axis=1)

    h2 = (idx * idx).sum(axis=1)
    in_shell = (h2 <= 1) if C == 1 else ((4 * h2 > C * C) & (h2 <= C * C))
    idx = idx[in_shell]
    lam = spec.freq_float(idx)
    margin = 1e-9
    sure = np.abs(lam) <= 1.0 - margin
    near = np.flatnonzero(np.abs(np.abs(lam) - 1.0) <= margin)
    keep = [tuple(int(x) for x in row) for row in idx[sure]]
    for k in near:
        n = tuple(int(x) for x in idx[k])
        if spec.exact:
            if abs(spec.freq1(n)) <= 1:
                keep.append(n)
        elif abs(lam[k]) <= 1.0:
            keep.append(n)
    if not keep:
        raise DegenerateExtremizerError(
            f"no shell-{C} indices with frequency modulus <= 1"
        )
    return TrigPoly(spec, {n: 1.0 for n in keep})
