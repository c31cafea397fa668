"""Frequency lattices generated by positive, rationally independent vectors.

A lattice assigns to each integer index n (one block per spatial dimension)
the frequency vector whose i-th component is the dot product of the i-th
block with the i-th generator vector.  The Euclidean norm of the full index
is its *height*; dyadic height shells (C/2, C] partition the nonzero indices.

Diophantine probes (smallest frequency in a box, minimal frequency gap) use
the max-norm box |n|_inf <= H: the difference set of a box of side 2H+1 is
exactly the box of side 4H+1, which keeps the gap enumeration exact, and a
box probe can only catch more integer relations than the inscribed ball.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np

from . import budget as _budget
from .errors import ResonantLatticeError
from .scalars import QScalar, as_exact

__all__ = [
    "LatticeSpec",
    "sqrt2_lattice",
    "integer_lattice",
    "float_lattice",
    "ball_indices",
    "shell_indices",
    "count_in_interval",
    "max_unit_interval_count",
    "min_gap",
    "MinGapResult",
    "nonresonance_check",
    "NonResonanceResult",
]


def _coerce_entry(x):
    if isinstance(x, QScalar):
        return x
    if isinstance(x, (int, Rational)):
        return as_exact(x)
    if isinstance(x, float):
        return float(x)
    raise TypeError(f"generator entries must be numbers or QScalar, got {type(x)!r}")


class LatticeSpec:
    """Generator data: spatial dimension d, ranks nu, per-dimension generators.

    Entries are either all exact (QScalar / rationals, one common quadratic
    field) or all floats.  Exact mode keeps frequency comparisons and
    resonance detection sound; float mode uses a 1e-12 coincidence tolerance.
    """

    __slots__ = ("d", "nu", "omega", "exact", "_float_omega", "_blocks")

    def __init__(self, omega, d: int | None = None, check_height: int = 1):
        # omega: list of per-dimension generator vectors; a flat vector means d=1
        if omega and not isinstance(omega[0], (list, tuple)):
            omega = [list(omega)]
        omega = [list(block) for block in omega]
        if d is None:
            d = len(omega)
        if d != len(omega) or d < 1:
            raise ValueError("need one generator block per spatial dimension")
        blocks = [[_coerce_entry(x) for x in block] for block in omega]
        if any(len(b) == 0 for b in blocks):
            raise ValueError("generator blocks must be non-empty")

        has_float = any(isinstance(x, float) for b in blocks for x in b)
        if has_float:
            blocks = [[float(x) for x in b] for b in blocks]
            exact = False
        else:
            fields = {x.d for b in blocks for x in b if x.d != 1}
            if len(fields) > 1:
                raise ValueError(f"generators mix quadratic fields {sorted(fields)}")
            exact = True

        for b in blocks:
            for x in b:
                if (x.sign() <= 0) if exact else (x <= 0.0):
                    raise ValueError("generator entries must be positive")

        object.__setattr__(self, "d", d)
        object.__setattr__(self, "nu", tuple(len(b) for b in blocks))
        object.__setattr__(self, "omega", tuple(tuple(b) for b in blocks))
        object.__setattr__(self, "exact", exact)
        object.__setattr__(
            self,
            "_float_omega",
            tuple(np.array([float(x) for x in b], dtype=float) for b in blocks),
        )
        starts = np.cumsum((0,) + self.nu)
        object.__setattr__(
            self, "_blocks", tuple(slice(starts[i], starts[i + 1]) for i in range(d))
        )
        if check_height > 0:
            nonresonance_check(self, check_height)

    def __setattr__(self, name, value):
        raise AttributeError("LatticeSpec is immutable")

    # -- basic shape ----------------------------------------------------------

    @property
    def rank(self) -> int:
        return int(sum(self.nu))

    @property
    def b(self) -> int:
        """Density parameter: sum over dimensions of (rank - 1)."""
        return int(sum(n - 1 for n in self.nu))

    def block(self, i: int) -> slice:
        return self._blocks[i]

    def float_omega(self, i: int = 0) -> np.ndarray:
        return self._float_omega[i]

    @property
    def float_omega_flat(self) -> np.ndarray:
        return np.concatenate(self._float_omega)

    def __eq__(self, other):
        return (
            isinstance(other, LatticeSpec)
            and self.d == other.d
            and self.nu == other.nu
            and self.omega == other.omega
        )

    def __hash__(self):
        return hash((self.d, self.nu, self.omega))

    def __repr__(self):
        return f"LatticeSpec(d={self.d}, nu={list(self.nu)}, omega={self.omega!r})"

    # -- frequencies -----------------------------------------------------------

    def check_index(self, n) -> tuple[int, ...]:
        n = tuple(int(x) for x in n)
        if len(n) != self.rank:
            raise ValueError(f"index has {len(n)} entries, lattice rank is {self.rank}")
        return n

    def freq(self, n) -> tuple:
        """Frequency vector of index n: one dot product per dimension."""
        n = self.check_index(n)
        out = []
        for i in range(self.d):
            blk = n[self.block(i)]
            acc = None
            for c, w in zip(blk, self.omega[i]):
                term = c * w if self.exact else c * w
                acc = term if acc is None else acc + term
            if acc is None:
                acc = QScalar(0) if self.exact else 0.0
            out.append(acc)
        return tuple(out)

    def freq1(self, n):
        """Scalar frequency for one-dimensional lattices."""
        if self.d != 1:
            raise ValueError("freq1 requires d = 1")
        return self.freq(n)[0]

    def freq_float(self, idx: np.ndarray) -> np.ndarray:
        """Float frequencies for an (M, rank) index array; (M,) when d = 1."""
        idx = np.asarray(idx, dtype=np.int64)
        cols = [idx[:, self.block(i)] @ self._float_omega[i] for i in range(self.d)]
        return cols[0] if self.d == 1 else np.stack(cols, axis=1)

    # -- JSON -------------------------------------------------------------------

    def to_dict(self) -> dict:
        def enc(x):
            return x.to_dict() if isinstance(x, QScalar) else float(x)

        return {
            "d": self.d,
            "nu": list(self.nu),
            "omega": [[enc(x) for x in b] for b in self.omega],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "LatticeSpec":
        def dec(x):
            if isinstance(x, dict):
                return QScalar.from_dict(x)
            if isinstance(x, (int, float)):
                return x
            raise ValueError(f"bad generator entry {x!r}")

        omega = [[dec(x) for x in b] for b in obj["omega"]]
        spec = cls(omega, d=int(obj["d"]))
        if list(spec.nu) != [int(x) for x in obj["nu"]]:
            raise ValueError("nu does not match generator block lengths")
        return spec


def sqrt2_lattice() -> LatticeSpec:
    """The running example: d=1, generators (1, sqrt 2), exact."""
    return LatticeSpec([[QScalar(1), QScalar.sqrt(2)]])


def integer_lattice() -> LatticeSpec:
    """d=1 periodic lattice with generator (1)."""
    return LatticeSpec([[QScalar(1)]])


def float_lattice(entries) -> LatticeSpec:
    return LatticeSpec([[float(x) for x in entries]])


# -- index enumeration ----------------------------------------------------------


def _box_grid(rank: int, half: int, budget: int | None) -> np.ndarray:
    count = (2 * half + 1) ** rank
    _budget.check(count, budget, what=f"box enumeration ({2*half+1}^{rank} points)")
    axes = [np.arange(-half, half + 1, dtype=np.int64)] * rank
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def ball_indices(spec: LatticeSpec, radius: float, budget: int | None = None) -> np.ndarray:
    """All indices with Euclidean height <= radius, lexicographically sorted."""
    half = int(np.floor(radius))
    idx = _box_grid(spec.rank, half, budget)
    h2 = (idx * idx).sum(axis=1)
    return idx[h2 <= radius * radius]

def shell_indices(spec: LatticeSpec, C: int, budget: int | None = None) -> np.ndarray:
    """Indices in the dyadic height shell: C/2 < |n| <= C, with |n| <= 1 for C = 1."""
    if C < 1 or (C & (C - 1)) != 0:
        raise ValueError(f"shell parameter must be a dyadic integer >= 1, got {C}")
    idx = _box_grid(spec.rank, C, budget)
    h2 = (idx * idx).sum(axis=1)
    if C == 1:
        return idx[h2 <= 1]
    return idx[(4 * h2 > C * C) & (h2 <= C * C)]


# -- counting ---------------------------------------------------------------------


def _exact_in_interval(spec, n, lo, hi, include_lo, include_hi) -> bool:
    lam = spec.freq1(n)
    lo_ok = (lam >= lo) if include_lo else (lam > lo)
    hi_ok = (lam <= hi) if include_hi else (lam < hi)
    return lo_ok and hi_ok


def count_in_interval(
    spec: LatticeSpec,
    C: int,
    lo,
    hi,
    include_lo: bool = True,
    include_hi: bool = False,
    budget: int | None = None,
) -> int:
    """Number of shell-C indices whose frequency lies in the interval [lo, hi).

    Endpoint inclusion is configurable; boundary-grazing frequencies are
    decided exactly in exact mode.
    """
    if spec.d != 1:
        raise ValueError("count_in_interval requires d = 1")
    idx = shell_indices(spec, C, budget)
    lam = spec.freq_float(idx)
    flo, fhi = float(lo), float(hi)
    if flo > fhi:
        raise ValueError("empty interval bounds")
    margin = 1e-9 * (1.0 + abs(flo) + abs(fhi))
    inside = (lam > flo + margin) & (lam < fhi - margin)
    count = int(inside.sum())
    near = np.flatnonzero(
        (np.abs(lam - flo) <= margin) | (np.abs(lam - fhi) <= margin)
    )
    if len(near) == 0:
        return count
    if spec.exact:
        lo_x = lo if isinstance(lo, (int, Rational, QScalar)) else Fraction(float(lo))
        hi_x = hi if isinstance(hi, (int, Rational, QScalar)) else Fraction(float(hi))
        for row in idx[near]:
            if _exact_in_interval(spec, tuple(row), lo_x, hi_x, include_lo, include_hi):
                count += 1
    else:
        for row in near:
            v = lam[row]
            lo_ok = v >= flo if include_lo else v > flo
            hi_ok = v <= fhi if include_hi else v < fhi
            if lo_ok and hi_ok:
                count += 1
    return count


def max_unit_interval_count(
    spec: LatticeSpec, C: int, budget: int | None = None
) -> tuple[int, float]:
    """Largest number of shell-C frequencies in any closed interval of length 1.

    Returns (count, left endpoint of a maximizing interval).  The maximum over
    sliding windows is attained with the left endpoint on a frequency.
    """
    if spec.d != 1:
        raise ValueError("max_unit_interval_count requires d = 1")
    idx = shell_indices(spec, C, budget)
    if len(idx) == 0:
        return 0, 0.0
    lam = np.sort(spec.freq_float(idx))
    hi = np.searchsorted(lam, lam + 1.0, side="right")
    counts = hi - np.arange(len(lam))
    k = int(np.argmax(counts))
    return int(counts[k]), float(lam[k])


# -- diophantine probes --------------------------------------------------------------


def _dim_box_min(spec, i, H, budget):
    """Min |frequency| over the punctured box |m|_inf <= H in dimension block i.

    Returns (min value as float, argmin index tuple).  Exact zeros raise.
    """
    rank = spec.nu[i]
    idx = _box_grid(rank, H, budget)
    idx = idx[np.any(idx != 0, axis=1)]
    vals = np.abs(idx @ spec.float_omega(i))
    scale = 1e-12 * (1.0 + float(np.abs(spec.float_omega(i)).sum()) * H)
    j = int(np.argmin(vals))
    if spec.exact:
        suspects = np.flatnonzero(vals <= max(scale, vals[j] * (1 + 1e-9)))
        best = None
        for row in idx[suspects]:
            acc = QScalar(0)
            for c, w in zip(row, spec.omega[i]):
                acc = acc + int(c) * w
            if acc.is_zero:
                raise ResonantLatticeError(
                    f"generators of dimension {i} satisfy the integer relation "
                    f"{tuple(int(x) for x in row)}",
                    relation=tuple(int(x) for x in row),
                )
            v = abs(float(acc))
            if best is None or v < best[0]:
                best = (v, tuple(int(x) for x in row))
        if best is not None and best[0] < vals[j]:
            return best
        return float(vals[j]), tuple(int(x) for x in idx[j])
    if vals[j] <= scale:
        raise ResonantLatticeError(
            f"float-mode frequency {vals[j]:.3e} at {tuple(int(x) for x in idx[j])} "
            f"is below the coincidence tolerance {scale:.3e}",
            relation=tuple(int(x) for x in idx[j]),
        )
    return float(vals[j]), tuple(int(x) for x in idx[j])


@dataclass(frozen=True)
class NonResonanceResult:
    min_abs: float
    argmin: tuple[int, ...]
    dimension: int
    height: int


def nonresonance_check(spec: LatticeSpec, H: int, budget: int | None = None) -> NonResonanceResult:
    """Smallest |frequency| over nonzero indices in the box |n|_inf <= H.

    Exact mode either returns a strictly positive witness or raises
    ``ResonantLatticeError`` with the integer relation; float mode raises when
    the minimum falls below the coincidence tolerance.
    """
    if H < 1:
        raise ValueError("H must be >= 1")
    best = None
    for i in range(spec.d):
        v, arg = _dim_box_min(spec, i, H, budget)
        if best is None or v < best[0]:
            best = (v, arg, i)
    return NonResonanceResult(best[0], best[1], best[2], H)


@dataclass(frozen=True)
class MinGapResult:
    gap: float
    alpha: float
    beta: float
    heights: tuple[tuple[int, float], ...]


def min_gap(spec: LatticeSpec, H: int, budget: int | None = None) -> MinGapResult:
    """Minimal distance between distinct frequencies of height <= h, h = 2,4,...,H.

    With box heights the difference set is the box of side 4h+1, so the gap at
    height h is exactly the smallest nonzero |frequency| over |m|_inf <= 2h.
    The decay is summarized by a least-squares fit gap(h) ~ alpha * h^-beta.
    """
    if spec.d != 1:
        raise ValueError("min_gap requires d = 1")
    if H < 1:
        raise ValueError("H must be >= 1")
    heights = []
    h = 2
    while h <= H:
        heights.append(h)
        h *= 2
    if not heights or heights[-1] != H:
        heights.append(H)
    rows = []
    for h in heights:
        v, _ = _dim_box_min(spec, 0, 2 * h, budget)
        rows.append((h, v))
    gaps = np.array([g for _, g in rows])
    hs = np.array([h for h, _ in rows], dtype=float)
    if len(rows) >= 2 and np.all(gaps > 0):
        A = np.stack([np.log(hs), np.ones_like(hs)], axis=1)
        sol, *_ = np.linalg.lstsq(A, np.log(gaps), rcond=None)
        beta = -float(sol[0])
        alpha = float(np.exp(sol[1]))
    else:
        beta, alpha = 0.0, float(gaps[-1])
    return MinGapResult(float(gaps[-1]), alpha, beta, tuple(rows))

