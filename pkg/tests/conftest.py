import math

import numpy as np
import pytest

from qpwave import LatticeSpec, TrigPoly, integer_lattice, sqrt2_lattice

SQRT2 = math.sqrt(2.0)


@pytest.fixture
def sqrt2_spec():
    return sqrt2_lattice()


@pytest.fixture
def int_spec():
    return integer_lattice()


@pytest.fixture
def sqrt23_spec():
    # float-mode rank-3 generators (1, sqrt2, sqrt3)
    return LatticeSpec([[1.0, math.sqrt(2.0), math.sqrt(3.0)]])


def random_poly(spec, n_modes, rng, box=6, real=False, unit=False):
    """Random sparse data with indices in a small box."""
    modes = {}
    while len(modes) < n_modes:
        n = tuple(int(x) for x in rng.integers(-box, box + 1, size=spec.rank))
        if n in modes:
            continue
        c = complex(rng.standard_normal(), rng.standard_normal())
        if real:
            if n == (0,) * spec.rank or tuple(-x for x in n) in modes:
                continue
            modes[n] = c
            modes[tuple(-x for x in n)] = c.conjugate()
        else:
            modes[n] = c
    f = TrigPoly(spec, modes)
    if unit:
        f = (1.0 / f.l2_norm()) * f
    return f


# -- independent brute-force oracles ------------------------------------------------


def oracle_mean_p4(f: TrigPoly) -> float:
    """Mean of |f|^4 by direct quadruple enumeration over the support."""
    items = list(f.items())
    total = 0.0 + 0.0j
    for n1, a1 in items:
        for n2, a2 in items:
            for n3, a3 in items:
                for n4, a4 in items:
                    if all(
                        x1 + x2 == x3 + x4 for x1, x2, x3, x4 in zip(n1, n2, n3, n4)
                    ):
                        total += a1 * a2 * a3.conjugate() * a4.conjugate()
    assert abs(total.imag) < 1e-10 * max(abs(total.real), 1.0)
    return total.real


def oracle_mean_p6(f: TrigPoly) -> float:
    """Mean of |f|^6 by direct sextuple enumeration (small supports only)."""
    items = list(f.items())
    total = 0.0 + 0.0j
    for n1, a1 in items:
        for n2, a2 in items:
            for n3, a3 in items:
                key = tuple(x1 + x2 + x3 for x1, x2, x3 in zip(n1, n2, n3))
                for n4, a4 in items:
                    for n5, a5 in items:
                        for n6, a6 in items:
                            if key == tuple(
                                y1 + y2 + y3 for y1, y2, y3 in zip(n4, n5, n6)
                            ):
                                total += (
                                    a1 * a2 * a3
                                    * a4.conjugate() * a5.conjugate() * a6.conjugate()
                                )
    assert abs(total.imag) < 1e-10 * max(abs(total.real), 1.0)
    return total.real


def oracle_box_min_freq(omega_floats, H):
    """Smallest nonzero |frequency| over the box |n|_inf <= H, by enumeration."""
    r = len(omega_floats)
    best = None
    grids = np.meshgrid(*([np.arange(-H, H + 1)] * r), indexing="ij")
    idx = np.stack([g.ravel() for g in grids], axis=1)
    idx = idx[np.any(idx != 0, axis=1)]
    vals = np.abs(idx @ np.asarray(omega_floats))
    return float(vals.min())


def sqrt2_convergents(count=12):
    """Continued-fraction convergents p/q of sqrt 2: best rational approximations."""
    out = []
    p0, q0 = 1, 0
    p1, q1 = 1, 1
    out.append((p1, q1))
    for _ in range(count - 1):
        p0, q0, p1, q1 = p1, q1, 2 * p1 + p0, 2 * q1 + q0
        out.append((p1, q1))
    return out
