"""Galerkin-truncated nonlinear Schroedinger flow on a frequency lattice.

Time stepping: on each step the solution is written in the interaction
picture relative to the step start and the Duhamel integral is solved by
Picard sweeps on a 4-point Gauss-Legendre collocation grid (node integrals
use the exact integrals of the degree-3 interpolant, the endpoint uses the
Gauss weights).  Fully converged, this is the 4-point Gauss implicit
Runge-Kutta step: order 8 at the step ends and exactly conservative on
quadratic invariants, so the measured mass drift reflects the Picard
tolerance rather than the step size.  The contraction ratio of the sweeps is
monitored; failure to contract signals a step size or data size too large
for the fixed point to exist.

Internally a solve runs on dense coefficient vectors over the truncation
ball with convolution index tables built once per solve; problems whose
tables would exceed the work budget (or nonlinearity powers above cubic)
fall back to sparse-dictionary arithmetic.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import budget as _budget
from .errors import BudgetError, NonContractionError
from .evolution import DispersionSymbol, propagate
from .kernels import group_sum, pack_rows, phi1
from .lattice import ball_indices
from .meannorms import _fold_tuple_data, evolved_factor_data
from .report import ScanReport
from .trigpoly import TrigPoly, extremizer, multiply, project_ball, sobolev_norm

__all__ = [
    "SolverConfig",
    "StepRecord",
    "SolveTrace",
    "SolveResult",
    "cubic_nonlinearity",
    "power_nonlinearity",
    "solve",
    "first_picard_iterate",
    "picard_blowup_scan",
]

TRUNCATION_WARN_FRACTION = 1e-6

# 4-point Gauss-Legendre collocation on [0, 1]
_X, _W = np.polynomial.legendre.leggauss(4)
_NODES = (_X + 1.0) / 2.0
_END_WEIGHTS = _W / 2.0
_LAGRANGE = np.linalg.inv(np.vander(_NODES, 4, increasing=True))
# _NODE_INTEGRALS[q, j] = integral over [0, node_q] of the j-th Lagrange basis
_NODE_INTEGRALS = np.array(
    [
        [
            sum(_LAGRANGE[k, j] * _NODES[q] ** (k + 1) / (k + 1) for k in range(4))
            for j in range(4)
        ]
        for q in range(4)
    ]
)


@dataclass(frozen=True)
class SolverConfig:
    trunc_height: float
    dt: float
    T: float
    picard_tol: float = 1e-10
    max_picard: int = 25
    sign: int = 1  # +1: defocusing, -1: focusing
    power: int = 2  # nonlinearity |u|^(2(power-1)) u; 2 is cubic
    trace_s: float = 1.0  # regularity monitored in the trace

    def __post_init__(self):
        if self.dt <= 0 or self.T <= 0 or self.picard_tol <= 0:
            raise ValueError("dt, T, picard_tol must be positive")
        if self.sign not in (-1, 1):
            raise ValueError("sign must be +1 or -1")
        if self.power < 2:
            raise ValueError("power must be >= 2")
        if self.trunc_height < 1:
            raise ValueError("trunc_height must be >= 1")

    def to_dict(self) -> dict:
        return {
            "trunc_height": self.trunc_height,
            "dt": self.dt,
            "T": self.T,
            "picard_tol": self.picard_tol,
            "max_picard": self.max_picard,
            "sign": self.sign,
            "power": self.power,
            "trace_s": self.trace_s,
        }


@dataclass(frozen=True)
class StepRecord:
    t: float
    mass: float  # squared mean-L^2 norm
    hs_norm: float
    trunc_loss: float  # squared norm of the step increment lost to truncation
    picard_iters: int
    contraction: float


@dataclass
class SolveTrace:
    records: list[StepRecord] = field(default_factory=list)

    def append(self, rec: StepRecord) -> None:
        self.records.append(rec)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def write_csv(self, path, config: dict | None = None) -> None:
        lines = []
        if config is not None:
            import json

            lines.append(
                "# config=" + json.dumps(config, sort_keys=True, separators=(",", ":"))
            )
        lines.append("t,mass,hs_norm,trunc_loss,picard_iters,contraction")
        for r in self.records:
            lines.append(
                f"{r.t!r},{r.mass!r},{r.hs_norm!r},{r.trunc_loss!r},"
                f"{r.picard_iters},{r.contraction!r}"
            )
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")


@dataclass(frozen=True)
class SolveResult:
    final: TrigPoly
    trace: SolveTrace


# -- nonlinearities --------------------------------------------------------------


def _truncated(f: TrigPoly, trunc_height: float | None) -> tuple[TrigPoly, float]:
    if trunc_height is None:
        return f, 0.0
    kept = project_ball(f, trunc_height)
    lost = f.l2_norm() ** 2 - kept.l2_norm() ** 2
    return kept, max(lost, 0.0)


def cubic_nonlinearity(
    u: TrigPoly,
    sign: int = 1,
    trunc_height: float | None = None,
    budget: int | None = None,
) -> TrigPoly:
    """sign * |u|^2 u by two lattice convolutions, Galerkin-truncated."""
    out, _ = _power_with_loss(u, 2, sign, trunc_height, budget)
    return out


def power_nonlinearity(
    u: TrigPoly,
    power: int,
    sign: int = 1,
    trunc_height: float | None = None,
    budget: int | None = None,
) -> TrigPoly:
    """sign * |u|^(2(power-1)) u; power = 2 recovers the cubic case."""
    out, _ = _power_with_loss(u, power, sign, trunc_height, budget)
    return out


def _power_with_loss(u, power, sign, trunc_height, budget):
    uc = u.conj()
    v = u
    for _ in range(power - 1):
        v = multiply(v, uc, budget=budget)
        v = multiply(v, u, budget=budget)
    if sign == -1:
        v = -v
    return _truncated(v, trunc_height)


# -- dense Galerkin engine -----------------------------------------------------------


def _lookup_positions(sorted_packed: np.ndarray, queries: np.ndarray):
    """Positions of queries in a sorted packed-key array; (positions, hit mask)."""
    pos = np.searchsorted(sorted_packed, queries)
    pos = np.minimum(pos, len(sorted_packed) - 1)
    hit = sorted_packed[pos] == queries
    return pos, hit


class _ConvTable:
    """Index tables for one convolution layer A x B -> C (full output support).

    Pair products are pre-sorted by output bin so one reduceat pass per
    application performs the whole grouped sum.
    """

    __slots__ = ("i", "j", "cuts", "size", "out_indices")

    def __init__(self, a_idx, b_idx):
        na, nb = len(a_idx), len(b_idx)
        r = a_idx.shape[1]
        sums = (a_idx[:, None, :] + b_idx[None, :, :]).reshape(-1, r)
        packed = pack_rows(sums)
        order = np.argsort(packed, kind="stable")
        packed = packed[order]
        cuts = np.flatnonzero(np.r_[True, packed[1:] != packed[:-1]])
        self.i = (np.repeat(np.arange(na), nb))[order]
        self.j = (np.tile(np.arange(nb), na))[order]
        self.cuts = cuts
        self.size = len(cuts)
        self.out_indices = sums[order[cuts]]

    def apply(self, a_vec, b_vec):
        return np.add.reduceat(a_vec[self.i] * b_vec[self.j], self.cuts)


class _DensePlan:
    """Precomputed basis and convolution tables for the truncated flow.

    The state vector lives on the ball of the truncation height.  The cubic
    plan computes u * conj(u) on the doubled ball, then the product with u on
    the tripled ball, and projects back; the quadratic (derivative) plan stops
    after one layer.  The squared norm outside the ball is the truncation
    loss of the evaluated right-hand side.
    """

    def __init__(self, spec, trunc_height, kind, sign=1, budget=None):
        self.spec = spec
        self.kind = kind
        self.sign = sign
        basis = ball_indices(spec, trunc_height, budget)
        order = np.lexsort(basis.T[::-1])
        basis = basis[order]
        self.basis = basis
        nb = len(basis)
        # one packing width covers every index this plan touches (sums up to 3x)
        self._bits = (3 * (int(trunc_height) + 1)).bit_length() + 2
        packed = pack_rows(basis, bits=self._bits)
        srt = np.argsort(packed)
        self._packed_sorted = packed[srt]
        self._packed_order = srt
        # position of -n for every basis point (the ball is symmetric)
        pos, hit = _lookup_positions(self._packed_sorted, pack_rows(-basis, bits=self._bits))
        assert hit.all()
        self.mirror = self._packed_order[pos]

        _budget.check(nb * nb, budget, what="dense convolution plan (layer 1)")
        self.t1 = _ConvTable(basis, basis)
        mid = self.t1.out_indices
        if kind == "cubic":
            _budget.check(len(mid) * nb, budget, what="dense convolution plan (layer 2)")
            self.t2 = _ConvTable(mid, basis)
            self._final_to_basis(self.t2.out_indices)
        else:  # derivative quadratic: single layer, multiplier i*freq/2 on mid
            lam = spec.freq_float(mid)
            self.mid_multiplier = 0.5j * lam
            self._final_to_basis(mid)

    def _final_to_basis(self, final_idx):
        pos, hit = _lookup_positions(
            self._packed_sorted, pack_rows(final_idx, bits=self._bits)
        )
        self.final_hit = hit
        self.final_target = self._packed_order[pos]

    def load(self, u: TrigPoly) -> np.ndarray:
        vec = np.zeros(len(self.basis), dtype=complex)
        idx, vals = u.as_arrays()
        if len(idx):
            pos, hit = _lookup_positions(
                self._packed_sorted, pack_rows(idx, bits=self._bits)
            )
            if not hit.all():
                raise ValueError("data escapes the truncation ball")
            vec[self._packed_order[pos]] = vals
        return vec

    def unload(self, vec: np.ndarray) -> TrigPoly:
        nz = np.flatnonzero(np.abs(vec) > 0)
        return TrigPoly.from_arrays(self.spec, self.basis[nz], vec[nz], prune=True)

    def rhs(self, vec: np.ndarray) -> tuple[np.ndarray, float]:
        if self.kind == "cubic":
            ubar = np.conj(vec)[self.mirror]
            w1 = self.t1.apply(vec, ubar)
            w2 = self.t2.apply(w1, vec)
            w2 = (-1j * self.sign) * w2
        else:
            w1 = self.t1.apply(vec, vec)
            w2 = self.mid_multiplier * w1
        out = np.zeros(len(self.basis), dtype=complex)
        out[self.final_target[self.final_hit]] = w2[self.final_hit]
        total = float((w2.real**2 + w2.imag**2).sum())
        inside = float((out.real**2 + out.imag**2).sum())
        return out, max(total - inside, 0.0)


# -- the collocation engine ------------------------------------------------------------


def _step_vectors(u_vec, dt, rates, rhs, tol, max_sweeps):
    """One Gauss-collocation Picard step on coefficient vectors.

    rhs(vector) -> (duhamel right-hand side, squared norm lost to truncation).
    Returns (vector at step end, sweeps, last contraction ratio, max rhs loss).
    """
    taus = _NODES * dt
    node_phase = [np.exp(1j * tau * rates) for tau in taus]
    w_nodes = [u_vec] * 4
    f_nodes = None
    prev_diff = None
    ratio = math.nan
    max_loss = 0.0
    for sweep in range(1, max_sweeps + 1):
        f_nodes = []
        for q in range(4):
            g, loss = rhs(w_nodes[q] * node_phase[q])
            max_loss = max(max_loss, loss)
            f_nodes.append(g * np.conj(node_phase[q]))
        diff = 0.0
        new_nodes = []
        for q in range(4):
            acc = u_vec + dt * (
                _NODE_INTEGRALS[q, 0] * f_nodes[0]
                + _NODE_INTEGRALS[q, 1] * f_nodes[1]
                + _NODE_INTEGRALS[q, 2] * f_nodes[2]
                + _NODE_INTEGRALS[q, 3] * f_nodes[3]
            )
            d = float(np.linalg.norm(acc - w_nodes[q]))
            diff = max(diff, d if math.isfinite(d) else math.inf)
            new_nodes.append(acc)
        w_nodes = new_nodes
        if prev_diff is not None and prev_diff > 0:
            if math.isfinite(diff) and math.isfinite(prev_diff):
                ratio = diff / prev_diff
            else:
                ratio = math.inf
        prev_diff = diff
        if diff < tol:
            break
    else:
        raise NonContractionError(
            f"Picard sweeps did not reach tol={tol} in {max_sweeps} iterations "
            f"(last contraction ratio {ratio:.3g}); reduce dt or the data size",
            ratio=ratio,
        )
    w_end = u_vec + dt * (
        _END_WEIGHTS[0] * f_nodes[0]
        + _END_WEIGHTS[1] * f_nodes[1]
        + _END_WEIGHTS[2] * f_nodes[2]
        + _END_WEIGHTS[3] * f_nodes[3]
    )
    return w_end * np.exp(1j * dt * rates), sweep, ratio, max_loss


def _split_steps(T, dt):
    nsteps = int(round(T / dt))
    steps = [dt] * nsteps
    rem = T - nsteps * dt
    if abs(rem) > 1e-12 * max(T, 1.0):
        if rem > 0:
            steps.append(rem)
        else:
            steps[-1] += rem
    return steps


def _run_solver(u0, cfg, symbol, rhs_kind, budget=None):
    if project_ball(u0, cfg.trunc_height).l2_norm() != u0.l2_norm():
        raise ValueError("initial data must be supported inside the truncation ball")

    plan = None
    if rhs_kind == "derivative" or cfg.power == 2:
        try:
            plan = _DensePlan(
                u0.spec, cfg.trunc_height, rhs_kind, sign=cfg.sign, budget=budget
            )
        except BudgetError:
            plan = None

    if plan is not None:
        state = plan.load(u0)
        rates = symbol.rates_for_indices(u0.spec, plan.basis)
        rhs = plan.rhs
    else:
        state = u0

        def rhs_dict(u_phys):
            if rhs_kind == "cubic":
                g, loss = _power_with_loss(u_phys, cfg.power, cfg.sign, cfg.trunc_height, budget)
                return -1j * g, loss
            from .kdv import _kdv_rhs_with_loss

            return _kdv_rhs_with_loss(u_phys, cfg.trunc_height, budget)

    trace = SolveTrace()
    t = 0.0
    warned = False
    cumulative_loss = 0.0
    for h in _split_steps(cfg.T, cfg.dt):
        if plan is not None:
            state, sweeps, ratio, loss = _step_vectors(
                state, h, rates, rhs, cfg.picard_tol, cfg.max_picard
            )
            mass = float(np.linalg.norm(state)) ** 2
        else:
            state, sweeps, ratio, loss = _step_poly(
                state, h, symbol, rhs_dict, cfg.picard_tol, cfg.max_picard
            )
            mass = state.l2_norm() ** 2
        t += h
        step_loss = h * h * loss
        cumulative_loss += step_loss
        if not warned and mass > 0 and cumulative_loss > TRUNCATION_WARN_FRACTION * mass:
            warnings.warn(
                f"Galerkin truncation has discarded {cumulative_loss:.3e} of mass "
                f"{mass:.3e} by t={t:.4g}; increase trunc_height",
                stacklevel=3,
            )
            warned = True
        u_here = plan.unload(state) if plan is not None else state
        trace.append(
            StepRecord(t, mass, sobolev_norm(u_here, cfg.trace_s), step_loss, sweeps, ratio)
        )
    final = plan.unload(state) if plan is not None else state
    return SolveResult(final, trace)


def _step_poly(u, dt, symbol, rhs, tol, max_sweeps):
    """Sparse-dictionary variant of the collocation step (fallback path)."""
    taus = _NODES * dt
    w_nodes = [u] * 4
    f_nodes = None
    prev_diff = None
    ratio = math.nan
    max_loss = 0.0
    for sweep in range(1, max_sweeps + 1):
        f_nodes = []
        for q in range(4):
            g, loss = rhs(propagate(w_nodes[q], symbol, taus[q]))
            max_loss = max(max_loss, loss)
            f_nodes.append(propagate(g, symbol, -taus[q]))
        diff = 0.0
        new_nodes = []
        for q in range(4):
            acc = u
            for j in range(4):
                acc = acc + (dt * _NODE_INTEGRALS[q, j]) * f_nodes[j]
            d = (acc - w_nodes[q]).l2_norm()
            diff = max(diff, d if math.isfinite(d) else math.inf)
            new_nodes.append(acc)
        w_nodes = new_nodes
        if prev_diff is not None and prev_diff > 0:
            if math.isfinite(diff) and math.isfinite(prev_diff):
                ratio = diff / prev_diff
            else:
                ratio = math.inf
        prev_diff = diff
        if diff < tol:
            break
    else:
        raise NonContractionError(
            f"Picard sweeps did not reach tol={tol} in {max_sweeps} iterations "
            f"(last contraction ratio {ratio:.3g}); reduce dt or the data size",
            ratio=ratio,
        )
    w_end = u
    for j in range(4):
        w_end = w_end + (dt * _END_WEIGHTS[j]) * f_nodes[j]
    return propagate(w_end, symbol, dt), sweep, ratio, max_loss


def solve(
    u0: TrigPoly,
    cfg: SolverConfig,
    symbol: DispersionSymbol | None = None,
    budget: int | None = None,
) -> SolveResult:
    """Integrate i u_t + u_xx = sign |u|^(2(power-1)) u from data u0 up to T."""
    if symbol is None:
        symbol = DispersionSymbol.schrodinger()
    return _run_solver(u0, cfg, symbol, "cubic", budget)


# -- the first Picard iterate, exactly ------------------------------------------------


def first_picard_iterate(
    f: TrigPoly, t: float, power: int = 2, budget: int | None = None
) -> TrigPoly:
    """Closed-form Duhamel integral of the free-evolution nonlinearity.

    Coefficient at n: the sum over signed index tuples summing to n of the
    coefficient products times the integral over [0, t] of the oscillation
    with the tuple's phase mismatch, evaluated through phi1.  The outer free
    factor (unit modulus) and the -i Duhamel prefactor are omitted; every
    norm of the result is unaffected.
    """
    if t == 0 or not f:
        return TrigPoly.zero(f.spec)
    symbol = DispersionSymbol.schrodinger()
    nfac = 2 * power - 1
    datas = [evolved_factor_data(f, symbol, conjugated=bool(j % 2)) for j in range(nfac - 1)]
    folded = datas[0] if len(datas) == 1 else _fold_tuple_data(datas, budget)
    last_idx, last_val, last_rate, _ = evolved_factor_data(f, symbol)
    base_idx, base_val, base_rate = folded[0], folded[1], folded[2]
    _budget.check(len(base_val) * len(last_val), budget, what="Duhamel tuple sum")

    spec = f.spec
    chunk = max(1, int(2_000_000 / max(len(last_val), 1)))
    parts_idx, parts_val = [], []
    for k in range(0, len(base_val), chunk):
        bi = base_idx[k : k + chunk]
        bv = base_val[k : k + chunk]
        br = base_rate[k : k + chunk]
        out_idx = (bi[:, None, :] + last_idx[None, :, :]).reshape(-1, spec.rank)
        rate_sum = (br[:, None] + last_rate[None, :]).ravel()
        vals = (bv[:, None] * last_val[None, :]).ravel()
        lam_out = spec.freq_float(out_idx)
        rho_out = -(lam_out * lam_out) if spec.d == 1 else -(lam_out * lam_out).sum(axis=1)
        mism = rate_sum - rho_out
        contrib = vals * (t * phi1(1j * t * mism))
        gi, gv = group_sum(out_idx, contrib)
        parts_idx.append(gi)
        parts_val.append(gv)
    all_idx = np.concatenate(parts_idx, axis=0)
    all_val = np.concatenate(parts_val)
    gi, gv = group_sum(all_idx, all_val)
    return TrigPoly.from_arrays(spec, gi, gv, prune=True)


def picard_blowup_scan(
    spec,
    C_list,
    t: float = 0.01,
    power: int = 2,
    budget: int | None = None,
    workers: int = 1,
    config_extra: dict | None = None,
) -> ScanReport:
    """Growth of the first Picard iterate on the concentration family.

    Fits the slope of log ||iterate||_{H^0} against log C; for rank-1
    lattices the family degenerates to the handful of unit-frequency modes
    and the slope is flat.
    """

    def run_C(C):
        fam = _scan_family(spec, C, budget)
        val = first_picard_iterate(fam, t, power=power, budget=budget).l2_norm()
        return (float(C), val, val, val)

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run_C, C_list))
    else:
        rows = [run_C(C) for C in C_list]
    config = {
        "scan": "picard-blowup",
        "lattice": spec.to_dict(),
        "C_list": [int(c) for c in C_list],
        "t": t,
        "power": power,
    }
    config.update(config_extra or {})
    return ScanReport.from_rows("picard-blowup", rows, config)


def _scan_family(spec, C, budget=None) -> TrigPoly:
    """Concentration family at height C; rank-1 fallback: unit-frequency modes."""
    if spec.rank >= 2:
        return extremizer(spec, int(C), budget=budget)
    modes = {}
    for n in (-1, 0, 1):
        lam = spec.freq_float(np.array([[n]], dtype=np.int64))[0]
        if abs(lam) <= 1.0:
            modes[(n,)] = 1.0
    return TrigPoly(spec, modes)
