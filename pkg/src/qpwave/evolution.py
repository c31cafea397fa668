"""Free evolutions for polynomial dispersion laws, and Galilean boosts.

Sign convention, fixed once: a mode with frequency lam evolves as
e^{i t rate(lam)} with rate = -lam^2 for the Schroedinger law (multi-d:
-|lam|^2), rate = +lam^3 for the Airy law, and rate = -p(lam) for a custom
polynomial p.  Every norm computed in this package is invariant under
flipping these signs, so only internal consistency matters.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .scalars import QScalar
from .trigpoly import TrigPoly

__all__ = ["DispersionSymbol", "propagate", "galilean_boost", "boost_mixed_norm_check"]


@dataclass(frozen=True)
class DispersionSymbol:
    kind: str
    coeffs: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in ("schrodinger", "airy", "polynomial"):
            raise ValueError(f"unknown dispersion kind {self.kind!r}")
        if self.kind == "polynomial":
            if not self.coeffs or len(self.coeffs) > 5:
                raise ValueError("polynomial symbols have degree <= 4")
            if any(isinstance(c, complex) for c in self.coeffs):
                raise ValueError("polynomial symbols have real coefficients")

    @classmethod
    def schrodinger(cls) -> "DispersionSymbol":
        return cls("schrodinger")

    @classmethod
    def airy(cls) -> "DispersionSymbol":
        return cls("airy")

    @classmethod
    def polynomial(cls, coeffs) -> "DispersionSymbol":
        return cls("polynomial", tuple(float(c) for c in coeffs))

    # -- float phase rates ------------------------------------------------------

    def phase_rates(self, f: TrigPoly) -> np.ndarray:
        """Per-mode rate r(n): the coefficient evolves as e^{i t r(n)}."""
        return self._rates_from_freqs(f.spec.d, f.freqs_float())

    def rates_for_indices(self, spec, idx: np.ndarray) -> np.ndarray:
        return self._rates_from_freqs(spec.d, spec.freq_float(idx))

    def _rates_from_freqs(self, d: int, lam: np.ndarray) -> np.ndarray:
        if self.kind == "schrodinger":
            if d == 1:
                return -lam * lam
            return -(lam * lam).sum(axis=1)
        if d != 1:
            raise ValueError(f"{self.kind} dispersion requires d = 1")
        if self.kind == "airy":
            return lam**3
        out = np.zeros_like(lam)
        for c in reversed(self.coeffs):
            out = out * lam + c
        return -out

    # -- exact phase identification ----------------------------------------------

    def phase_rate_keys(self, f: TrigPoly):
        """Exact per-mode phase identifiers, or None when unavailable.

        For an exact rank-nu lattice in one dimension the Schroedinger and
        Airy rates are again elements a + b sqrt(d); modes share a key iff
        their rates are exactly equal.  Returns an (M, 2) int64 array when the
        generators have integer coordinates, a list of Fraction pairs for
        general rationals, and None in float mode or for custom polynomials.
        """
        spec = f.spec
        if not spec.exact or spec.d != 1 or self.kind == "polynomial":
            return None
        idx, _ = f.as_arrays()
        a = [x.a for x in spec.omega[0]]
        b = [x.b for x in spec.omega[0]]
        d = max((x.d for x in spec.omega[0]), default=1)
        if all(x.denominator == 1 for x in a + b):
            A = np.array([int(x) for x in a], dtype=np.int64)
            B = np.array([int(x) for x in b], dtype=np.int64)
            P = idx @ A
            Q = idx @ B
            if self.kind == "schrodinger":
                return np.stack([-(P * P + d * Q * Q), -2 * P * Q], axis=1)
            return np.stack([P**3 + 3 * d * P * Q * Q, 3 * P * P * Q + d * Q**3], axis=1)
        keys = []
        for row in idx:
            lam = spec.freq1(tuple(int(x) for x in row))
            if not isinstance(lam, QScalar):
                lam = QScalar(Fraction(lam), 0)
            val = -(lam * lam) if self.kind == "schrodinger" else lam * lam * lam
            keys.append((val.a, val.b))
        return keys


def propagate(f: TrigPoly, symbol: DispersionSymbol, t: float) -> TrigPoly:
    """Multiply each coefficient by its unit-modulus evolution factor."""
    if not f:
        return f
    idx, vals = f.as_arrays()
    rates = symbol.phase_rates(f)
    return TrigPoly.from_arrays(f.spec, idx, vals * np.exp(1j * float(t) * rates))


def galilean_boost(f: TrigPoly, a) -> TrigPoly:
    """Shift every index by a; frequencies shift by the frequency of a."""
    return f.shift(a)


def boost_mixed_norm_check(
    f: TrigPoly,
    a,
    T: float,
    symbol: DispersionSymbol | None = None,
) -> tuple[float, float]:
    """Windowed space-time norm of the evolution of f and of its boost.

    The quadruple phases are unchanged by a frequency shift (the linear and
    constant terms cancel on the convolution constraint), so the two values
    agree up to roundoff.
    """
    from .meannorms import MixedNormSpec, mixed_norm_free

    if symbol is None:
        symbol = DispersionSymbol.schrodinger()
    mspec = MixedNormSpec(p=4, time_mode="window", T=T)
    return (
        mixed_norm_free(f, symbol, mspec),
        mixed_norm_free(galilean_boost(f, a), symbol, mspec),
    )
