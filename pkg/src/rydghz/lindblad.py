"""Time-dependent Lindblad master equations: right-hand side, fixed-step RK4
propagation with piecewise schedules, steady states and state diagnostics.

Density matrices are vectorized row-major, so ``vec(A rho B) = (A kron B^T) vec(rho)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence, Union

import numpy as np
import scipy.sparse as sp

from rydghz import _kernels

log = logging.getLogger(__name__)

TRACE_DRIFT_LIMIT = 1e-6
STEADY_TOL = 1e-8
STEADY_MAX_DIM = 32


class NumericalFailure(RuntimeError):
    """Integration or linear-algebra result that fails a numerical health check."""


class NonUniqueSteadyState(NumericalFailure):
    def __init__(self, eigenvalues):
        self.eigenvalues = tuple(eigenvalues)
        super().__init__(
            "Liouvillian null space is degenerate; smallest eigenvalues "
            + ", ".join(f"{complex(e):.3e}" for e in self.eigenvalues)
        )


# --------------------------------------------------------------------------
# envelopes
# --------------------------------------------------------------------------


class Envelope:
    """Scalar time profile multiplying a Hamiltonian term."""

    def __call__(self, t):
        raise NotImplementedError

    def conj(self) -> "Envelope":
        raise NotImplementedError

    @property
    def frequencies(self) -> tuple[float, ...]:
        return ()

    @property
    def is_constant(self) -> bool:
        return False

    @property
    def is_real(self) -> bool:
        return False


@dataclass(frozen=True)
class Constant(Envelope):
    value: complex = 1.0

    def __call__(self, t):
        return np.full(np.shape(t), self.value, dtype=complex)

    def conj(self):
        return Constant(np.conj(self.value))

    @property
    def is_constant(self):
        return True

    @property
    def is_real(self):
        return np.imag(self.value) == 0


@dataclass(frozen=True)
class ComplexExp(Envelope):
    """``exp(sign * i * omega * t)``."""

    omega: float
    sign: int = -1

    def __post_init__(self):
        if self.sign not in (-1, 1):
            raise ValueError("sign must be +1 or -1")

    def __call__(self, t):
        return np.exp(1j * self.sign * self.omega * np.asarray(t, dtype=float))

    def conj(self):
        return ComplexExp(self.omega, -self.sign)

    @property
    def frequencies(self):
        return (abs(self.omega),)

    @property
    def is_constant(self):
        return self.omega == 0

    @property
    def is_real(self):
        return self.omega == 0


@dataclass(frozen=True)
class Gaussian(Envelope):
    """``amplitude * exp(-(t - center)^2 / (2 width^2))``."""

    amplitude: float
    center: float
    width: float

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError("gaussian width must be positive")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return (self.amplitude * np.exp(-((t - self.center) ** 2) / (2 * self.width**2))).astype(
            complex
        )

    def conj(self):
        return self

    @property
    def is_real(self):
        return True


@dataclass(frozen=True)
class Product(Envelope):
    factors: tuple[Envelope, ...]

    def __call__(self, t):
        out = np.ones(np.shape(t), dtype=complex)
        for f in self.factors:
            out = out * f(t)
        return out

    def conj(self):
        return Product(tuple(f.conj() for f in self.factors))

    @property
    def frequencies(self):
        return tuple(w for f in self.factors for w in f.frequencies)

    @property
    def is_constant(self):
        return all(f.is_constant for f in self.factors)

    @property
    def is_real(self):
        return all(f.is_real for f in self.factors)


# --------------------------------------------------------------------------
# model containers
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class HTerm:
    """``envelope(t) * matrix``, plus its Hermitian conjugate when ``add_conjugate``."""

    matrix: np.ndarray
    envelope: Envelope = Constant()
    add_conjugate: bool = False

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"HTerm matrix must be square, got shape {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        if not self.add_conjugate:
            if np.max(np.abs(m - m.conj().T), initial=0.0) > 1e-12:
                raise ValueError("HTerm without add_conjugate needs a Hermitian matrix")
            if not self.envelope.is_real:
                raise ValueError("HTerm without add_conjugate needs a real envelope")


@dataclass(frozen=True, eq=False)
class Dissipator:
    """Jump operator with the square root of its rate absorbed."""

    L: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.L, dtype=complex)
        m.setflags(write=False)
        object.__setattr__(self, "L", m)


@dataclass(frozen=True, eq=False)
class MasterEq:
    """A simulable Lindblad master equation.

    ``frame`` optionally holds the diagonal of a static Hamiltonian already
    contained in ``hterms``; integration and observables then work in the frame
    rotating with it, ``rho_frame = exp(i h t) rho exp(-i h t)``.  ``f_max`` is the
    builder's estimate of the fastest angular frequency in the problem.
    """

    dim: int
    hterms: tuple[HTerm, ...]
    dissipators: tuple[Dissipator, ...] = ()
    label: str = ""
    f_max: float | None = None
    frame: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "hterms", tuple(self.hterms))
        object.__setattr__(self, "dissipators", tuple(self.dissipators))
        for h in self.hterms:
            if h.matrix.shape != (self.dim, self.dim):
                raise ValueError(f"HTerm of shape {h.matrix.shape} in a dim-{self.dim} model")
        for d in self.dissipators:
            if d.L.shape != (self.dim, self.dim):
                raise ValueError(f"Dissipator of shape {d.L.shape} in a dim-{self.dim} model")
        if self.frame is not None:
            fr = np.asarray(self.frame, dtype=float)
            if fr.shape != (self.dim,):
                raise ValueError("frame must be a length-dim real vector")
            fr.setflags(write=False)
            object.__setattr__(self, "frame", fr)

    @property
    def is_time_independent(self) -> bool:
        return all(h.envelope.is_constant for h in self.hterms)

    def hamiltonian(self, t: float = 0.0) -> np.ndarray:
        H = np.zeros((self.dim, self.dim), dtype=complex)
        for h in self.hterms:
            c = complex(h.envelope(t))
            H += c * h.matrix
            if h.add_conjugate:
                H += np.conj(c) * h.matrix.conj().T
        return H

    def max_frequency(self) -> float:
        if self.f_max is not None:
            return float(self.f_max)
        freqs = [w for h in self.hterms for w in h.envelope.frequencies]
        static = sum(
            (h.matrix + (h.matrix.conj().T if h.add_conjugate else 0)) * complex(h.envelope(0.0))
            for h in self.hterms
            if h.envelope.is_constant
        )
        if isinstance(static, np.ndarray):
            ev = np.linalg.eigvalsh((static + static.conj().T) / 2)
            freqs.append(ev[-1] - ev[0])
        freqs += [np.linalg.norm(d.L, 2) ** 2 for d in self.dissipators]
        return max(freqs, default=1.0) or 1.0

    def default_dt(self) -> float:
        return 0.05 / self.max_frequency()

    @cached_property
    def _sparse(self):
        hs = [
            (sp.csr_matrix(h.matrix), h.envelope, h.add_conjugate) for h in self.hterms
        ]
        ls = [sp.csr_matrix(d.L) for d in self.dissipators]
        return hs, ls

    @cached_property
    def generator(self) -> "_Generator":
        return _Generator.build(self)


@dataclass(frozen=True)
class Schedule:
    """Piecewise activation of master equations.

    ``segments`` is the ordered pattern of ``(duration, model key)``; the whole
    pattern is run ``repeats`` times.
    """

    models: Mapping[str, MasterEq]
    segments: tuple[tuple[float, str], ...]
    repeats: int = 1

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple((float(d), k) for d, k in self.segments))
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        if not self.segments:
            raise ValueError("schedule needs at least one segment")
        for d, k in self.segments:
            if not d > 0:
                raise ValueError(f"segment duration must be positive, got {d}")
            if k not in self.models:
                raise ValueError(f"unknown model key {k!r}")
        dims = {m.dim for m in self.models.values()}
        if len(dims) != 1:
            raise ValueError(f"schedule models disagree on dimension: {dims}")

    @property
    def dim(self) -> int:
        return next(iter(self.models.values())).dim

    @property
    def total_time(self) -> float:
        return self.repeats * sum(d for d, _ in self.segments)

    def expanded(self) -> list[tuple[float, float, MasterEq]]:
        """``(start, end, model)`` for every segment, boundaries from exact cumulative sums."""
        out = []
        durations = [d for _ in range(self.repeats) for d, _ in self.segments]
        keys = [k for _ in range(self.repeats) for _, k in self.segments]
        edges = np.concatenate([[0.0], np.cumsum(durations)])
        for i, k in enumerate(keys):
            out.append((float(edges[i]), float(edges[i + 1]), self.models[k]))
        return out

    def max_frequency(self) -> float:
        return max(m.max_frequency() for m in self.models.values())

    def default_dt(self) -> float:
        return 0.05 / self.max_frequency()


@dataclass
class TimeSeries:
    times: np.ndarray
    values: dict[str, np.ndarray]
    final_state: np.ndarray | None = None
    diagnostics: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        for k, v in self.values.items():
            v = np.asarray(v, dtype=float)
            if v.shape != self.times.shape:
                raise ValueError(f"column {k!r} has {v.size} samples, times has {self.times.size}")
            self.values[k] = v

    @property
    def labels(self) -> list[str]:
        return list(self.values)

    def __getitem__(self, label: str) -> np.ndarray:
        return self.values[label]

    def final(self, label: str) -> float:
        return float(self.values[label][-1])

    def at(self, label: str, t: float) -> float:
        return float(np.interp(t, self.times, self.values[label]))


# --------------------------------------------------------------------------
# superoperator compilation
# --------------------------------------------------------------------------


def _comm_super(m: sp.spmatrix, dim: int) -> sp.spmatrix:
    """Superoperator of ``rho -> -i [m, rho]``."""
    eye = sp.identity(dim, dtype=complex, format="csr")
    return -1j * (sp.kron(m, eye) - sp.kron(eye, m.T))


def _diss_super(L: sp.spmatrix, dim: int) -> sp.spmatrix:
    eye = sp.identity(dim, dtype=complex, format="csr")
    LdL = (L.conj().T @ L).tocsr()
    return sp.kron(L, L.conj()) - 0.5 * sp.kron(LdL, eye) - 0.5 * sp.kron(eye, LdL.T)


@dataclass
class _Generator:
    """Sparse terms of ``K = H - (i/2) sum L^dag L`` and of the jump map, each with
    a coefficient column ``envelope(t) * exp(i shift t)`` (see ``_kernels``).
    """

    dim: int
    k_slot: np.ndarray
    k_vals: np.ndarray
    k_term: np.ndarray
    u_rows: np.ndarray
    u_cols: np.ndarray
    j_out: np.ndarray
    j_in: np.ndarray
    j_vals: np.ndarray
    j_term: np.ndarray
    envelopes: list[Envelope | None]
    shifts: np.ndarray
    frame: np.ndarray | None

    @classmethod
    def build(cls, me: MasterEq) -> "_Generator":
        dim = me.dim
        h = np.zeros(dim) if me.frame is None else me.frame
        hs, ls = me._sparse
        static = sp.csr_matrix((dim, dim), dtype=complex)
        parts: list[tuple[sp.spmatrix, Envelope | None]] = []
        for m, env, conj in hs:
            if env.is_constant:
                c = complex(env(0.0))
                static = static + c * m
                if conj:
                    static = static + np.conj(c) * m.conj().T
                continue
            parts.append((m, env))
            if conj:
                parts.append((m.conj().T, env.conj()))
        for L in ls:
            static = static - 0.5j * (L.conj().T @ L)
        if me.frame is not None:
            static = static - sp.diags(h.astype(complex))
        parts.insert(0, (static, None))

        table: dict[tuple, int] = {}
        envs: list[Envelope | None] = []
        shifts: list[float] = []

        def term_index(env, nu):
            key = (env, float(np.round(nu, 9)))
            if key not in table:
                table[key] = len(envs)
                envs.append(env)
                shifts.append(key[1])
            return table[key]

        kr, kc, kv, kt = [], [], [], []
        for m, env in parts:
            m = sp.coo_matrix(m)
            m.sum_duplicates()
            keep = np.abs(m.data) > 1e-15
            for a, c, val in zip(m.row[keep], m.col[keep], m.data[keep]):
                kr.append(a)
                kc.append(c)
                kv.append(val)
                kt.append(term_index(env, h[a] - h[c]))
        pairs = sorted(set(zip(kr, kc)))
        slot_of = {pc: i for i, pc in enumerate(pairs)}

        jumps: dict[tuple[int, int, int], complex] = {}
        for L in ls:
            L = sp.coo_matrix(L)
            L.sum_duplicates()
            ent = [(a, c, v) for a, c, v in zip(L.row, L.col, L.data) if abs(v) > 1e-15]
            for ap, cp, vp in ent:
                for aq, cq, vq in ent:
                    nu = (h[ap] - h[cp]) - (h[aq] - h[cq])
                    key = (ap * dim + aq, cp * dim + cq, term_index(None, nu))
                    jumps[key] = jumps.get(key, 0.0) + vp * np.conj(vq)
        jkeys = sorted(jumps)
        return cls(
            dim=dim,
            k_slot=np.array([slot_of[pc] for pc in zip(kr, kc)], dtype=np.int64),
            k_vals=np.array(kv, dtype=complex),
            k_term=np.array(kt, dtype=np.int64),
            u_rows=np.array([a for a, _ in pairs], dtype=np.int64),
            u_cols=np.array([c for _, c in pairs], dtype=np.int64),
            j_out=np.array([k[0] for k in jkeys], dtype=np.int64),
            j_in=np.array([k[1] for k in jkeys], dtype=np.int64),
            j_vals=np.array([jumps[k] for k in jkeys], dtype=complex),
            j_term=np.array([k[2] for k in jkeys], dtype=np.int64),
            envelopes=envs,
            shifts=np.asarray(shifts, dtype=float),
            frame=me.frame,
        )

    @property
    def n_terms(self) -> int:
        return len(self.envelopes)

    @property
    def _arrays(self):
        return (
            self.k_slot,
            self.k_vals,
            self.k_term,
            self.u_rows,
            self.u_cols,
            self.j_out,
            self.j_in,
            self.j_vals,
            self.j_term,
        )

    def coefficients(self, t: np.ndarray) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty((t.size, self.n_terms), dtype=complex)
        for k, env in enumerate(self.envelopes):
            col = np.ones(t.size, dtype=complex) if env is None else env(t)
            if self.shifts[k] != 0.0:
                col = col * np.exp(1j * self.shifts[k] * t)
            out[:, k] = col
        return out

    def to_frame(self, rho: np.ndarray, t: float) -> np.ndarray:
        if self.frame is None:
            return rho
        ph = np.exp(1j * self.frame * t)
        return ph[:, None] * rho * ph.conj()[None, :]

    def from_frame(self, rho: np.ndarray, t: float) -> np.ndarray:
        if self.frame is None:
            return rho
        ph = np.exp(-1j * self.frame * t)
        return ph[:, None] * rho * ph.conj()[None, :]

    def apply(self, rho: np.ndarray, t: float) -> np.ndarray:
        """Frame-picture derivative of a Hermitian ``rho`` at time ``t``."""
        coef = self.coefficients(np.array([t]))[0]
        rho = np.ascontiguousarray(rho, dtype=complex)
        return _kernels.derivative(*self._arrays, coef, rho)

    def propagate(self, rho: np.ndarray, t0: float, dt: float, n: int) -> np.ndarray:
        if n <= 0:
            return rho
        tt = t0 + 0.5 * dt * np.arange(2 * n + 1)
        coefs = np.ascontiguousarray(self.coefficients(tt))
        return _kernels.rk4_steps(*self._arrays, coefs, rho, dt, n)


# --------------------------------------------------------------------------
# right-hand side
# --------------------------------------------------------------------------


def rhs(me: MasterEq, rho: np.ndarray, t: float) -> np.ndarray:
    """Lindblad derivative ``-i[H(t), rho] + sum_j D[L_j] rho`` in the model's own frame."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (me.dim, me.dim):
        raise ValueError(f"rho has shape {rho.shape}, model dimension is {me.dim}")
    hs, ls = me._sparse
    H = sp.csr_matrix((me.dim, me.dim), dtype=complex)
    for m, env, conj in hs:
        c = complex(env(t))
        H = H + c * m
        if conj:
            H = H + np.conj(c) * m.conj().T
    out = -1j * (H @ rho - (H.T @ rho.T).T)
    for L in ls:
        Lrho = L @ rho
        LdL = L.conj().T @ L
        out += (L.conj() @ Lrho.T).T - 0.5 * (LdL @ rho + (LdL.T @ rho.T).T)
    return np.asarray(out)


def liouvillian(me: MasterEq, t: float = 0.0) -> np.ndarray:
    """Dense ``dim^2 x dim^2`` superoperator at time ``t`` (row-major vectorization)."""
    dim = me.dim
    H = sp.csr_matrix(me.hamiltonian(t))
    S = _comm_super(H, dim)
    for L in me._sparse[1]:
        S = S + _diss_super(L, dim)
    return S.toarray()


# --------------------------------------------------------------------------
# observables and diagnostics
# --------------------------------------------------------------------------


def population(rho: np.ndarray, state: np.ndarray) -> float:
    """``<i|rho|i>`` for a unit-norm state vector."""
    state = np.asarray(state, dtype=complex)
    if state.shape != (rho.shape[0],):
        raise ValueError(f"state of length {state.size} for a {rho.shape[0]}-dim rho")
    val = np.vdot(state, rho @ state)
    if abs(val.imag) > 1e-10:
        raise NumericalFailure(f"population has imaginary part {val.imag:.3e}")
    return float(val.real)


def fidelity(rho: np.ndarray, target: np.ndarray) -> float:
    """Uhlmann fidelity to a pure target, ``sqrt(<psi|rho|psi>)``."""
    p = population(rho, target)
    if p < -1e-10:
        raise NumericalFailure(f"negative population {p:.3e} in fidelity")
    return math.sqrt(max(p, 0.0))


@dataclass(frozen=True)
class StateDiagnostics:
    trace_error: float
    hermiticity_error: float
    min_eigenvalue: float
    tol: float

    @property
    def trace_ok(self) -> bool:
        return self.trace_error <= self.tol

    @property
    def hermitian_ok(self) -> bool:
        return self.hermiticity_error <= self.tol

    @property
    def positive_ok(self) -> bool:
        return self.min_eigenvalue >= -self.tol

    @property
    def ok(self) -> bool:
        return self.trace_ok and self.hermitian_ok and self.positive_ok


def check_state(rho: np.ndarray, tol: float = 1e-8) -> StateDiagnostics:
    rho = np.asarray(rho, dtype=complex)
    herm = float(np.max(np.abs(rho - rho.conj().T), initial=0.0))
    ev = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
    return StateDiagnostics(
        trace_error=float(abs(np.trace(rho) - 1.0)),
        hermiticity_error=herm,
        min_eigenvalue=float(ev[0]),
        tol=tol,
    )


Observable = Union[np.ndarray, tuple]


def _observable_fn(obj: np.ndarray, dim: int):
    obj = np.asarray(obj, dtype=complex)
    if obj.shape == (dim,):
        return lambda rho: population(rho, obj)
    if obj.shape == (dim, dim):
        return lambda rho: float(np.real(np.trace(obj @ rho)))
    raise ValueError(f"observable of shape {obj.shape} for a dim-{dim} model")


# --------------------------------------------------------------------------
# integration
# --------------------------------------------------------------------------


def _segment_steps(t0: float, t1: float, dt: float) -> tuple[int, float]:
    """Number of regular steps and length of the final (shortened) step."""
    span = t1 - t0
    n = max(1, math.ceil(span / dt - 1e-9))
    last = span - (n - 1) * dt
    return n, last


def integrate(
    model: MasterEq | Schedule,
    rho0: np.ndarray,
    t_end: float | None = None,
    dt: float | None = None,
    observables: Sequence[tuple[str, np.ndarray]] = (),
    sample_stride: int = 1,
    t0: float = 0.0,
    check_dt: bool = True,
) -> TimeSeries:
    """Fixed-step RK4 propagation of ``rho0`` from ``t0`` to ``t_end``.

    Observables are sampled at ``t0``, every ``sample_stride`` steps and at the
    end.  A trace drift beyond 1e-6 at any sample raises ``NumericalFailure``.
    Schedule boundaries are hit exactly by shortening the last step of each
    segment.
    """
    rho0 = np.array(rho0, dtype=complex)  # private copy: the kernel updates in place
    dim = model.dim
    if rho0.shape != (dim, dim):
        raise ValueError(f"rho0 has shape {rho0.shape}, model dimension is {dim}")
    diag0 = check_state(rho0, tol=1e-8)
    if not diag0.ok:
        raise ValueError(f"invalid initial state: {diag0}")
    if sample_stride < 1:
        raise ValueError("sample_stride must be >= 1")

    if isinstance(model, Schedule):
        plan = [(t0 + a, t0 + b, me) for a, b, me in model.expanded()]
        if t_end is None:
            t_end = plan[-1][1]
        if t_end > plan[-1][1] + 1e-9:
            raise ValueError(f"t_end {t_end} beyond the schedule end {plan[-1][1]}")
        plan = [(a, min(b, t_end), me) for a, b, me in plan if a < t_end]
    else:
        if t_end is None:
            raise ValueError("t_end is required for a single master equation")
        plan = [(t0, t_end, model)]
    if not t_end > t0:
        raise ValueError("t_end must exceed t0")

    if dt is None:
        dt = model.default_dt()
    fmax = model.max_frequency()
    if check_dt and dt * fmax > 0.1 + 1e-12:
        raise ValueError(f"dt={dt:g} too coarse: dt*f_max={dt * fmax:.3g} > 0.1")

    obs = [(lab, _observable_fn(o, dim)) for lab, o in observables]
    times: list[float] = []
    cols: dict[str, list[float]] = {lab: [] for lab, _ in obs}
    worst = {"trace_drift": 0.0, "hermiticity_drift": 0.0, "min_eigenvalue": np.inf}
    state = {"steps": 0}

    def record(rho_f: np.ndarray, t: float):
        d = check_state(rho_f)
        worst["trace_drift"] = max(worst["trace_drift"], d.trace_error)
        worst["hermiticity_drift"] = max(worst["hermiticity_drift"], d.hermiticity_error)
        worst["min_eigenvalue"] = min(worst["min_eigenvalue"], d.min_eigenvalue)
        if d.trace_error > TRACE_DRIFT_LIMIT:
            raise NumericalFailure(
                f"trace drift {d.trace_error:.3e} after {state['steps']} steps (t={t:g})"
            )
        times.append(t)
        for lab, fn in obs:
            cols[lab].append(fn(rho_f))

    rho = rho0
    for i, (a, b, me) in enumerate(plan):
        gen = me.generator
        v = np.ascontiguousarray(gen.to_frame(rho, a))
        if i == 0:
            record(v, a)
        n, last = _segment_steps(a, b, dt)
        done = 0
        while done < n - 1:
            to_sample = sample_stride - state["steps"] % sample_stride
            k = min(to_sample, n - 1 - done)
            v = gen.propagate(v, a + done * dt, dt, k)
            done += k
            state["steps"] += k
            if state["steps"] % sample_stride == 0:
                record(v, a + done * dt)
        v = gen.propagate(v, a + done * dt, last, 1)
        state["steps"] += 1
        if state["steps"] % sample_stride == 0 or i == len(plan) - 1:
            record(v, b)
        rho = gen.from_frame(v, b)

    return TimeSeries(
        times=np.array(times),
        values={k: np.array(v) for k, v in cols.items()},
        final_state=rho,
        diagnostics={**worst, "steps": state["steps"], "dt": dt},
    )


# --------------------------------------------------------------------------
# steady state
# --------------------------------------------------------------------------


def steady_state(me: MasterEq, return_eigenvalues: bool = False):
    """Unique null vector of the Liouvillian as a density matrix.

    Only time-independent models of dimension <= 32 are handled; larger ones
    should be propagated to long times instead.
    """
    if not me.is_time_independent:
        raise ValueError("steady_state needs a time-independent master equation")
    if me.dim > STEADY_MAX_DIM:
        raise ValueError(
            f"dense Liouvillian eigensolve refused for dim {me.dim} > {STEADY_MAX_DIM}"
        )
    Lv = liouvillian(me)
    w, V = np.linalg.eig(Lv)
    order = np.argsort(np.abs(w))
    w, V = w[order], V[:, order]
    if abs(w[0]) > STEADY_TOL:
        raise NumericalFailure(f"no Liouvillian eigenvalue within {STEADY_TOL} of 0: {w[0]:.3e}")
    if abs(w[1]) <= STEADY_TOL:
        raise NonUniqueSteadyState(w[:2])
    rho = V[:, 0].reshape(me.dim, me.dim)
    rho = (rho + rho.conj().T) / 2
    rho = rho / np.trace(rho)
    if return_eigenvalues:
        return rho, w
    return rho


# --------------------------------------------------------------------------
# light shifts
# --------------------------------------------------------------------------


def _signed_frequency(env: Envelope) -> float:
    """Angular frequency ``w`` with ``env(t) = |env| exp(i w t)`` for phase-only envelopes."""
    if isinstance(env, Constant):
        return 0.0
    if isinstance(env, ComplexExp):
        return env.sign * env.omega
    if isinstance(env, Product):
        return sum(_signed_frequency(f) for f in env.factors)
    raise ValueError(f"envelope {env!r} has no single carrier frequency")


def _scalar_amplitude(env: Envelope) -> complex:
    if isinstance(env, Product):
        out = 1.0 + 0j
        for f in env.factors:
            out *= _scalar_amplitude(f)
        return out
    if isinstance(env, Constant):
        return complex(env.value)
    return 1.0 + 0j


def second_order_shift(me: MasterEq, tol: float = 1e-9) -> np.ndarray:
    """Time-averaged second-order light-shift operator of the fast Hamiltonian components.

    In the model's frame ``H(t) = sum_w H_w exp(i w t)``; the returned operator is
    ``sum_{w > 0} [H_w, H_w^dag] / w`` restricted to entries between states of equal
    frame energy, i.e. the static energy shifts, not the off-resonant transitions.
    """
    h = np.zeros(me.dim) if me.frame is None else me.frame
    comps: dict[float, np.ndarray] = {}
    for term in me.hterms:
        mats = [(term.matrix, term.envelope)]
        if term.add_conjugate:
            mats.append((term.matrix.conj().T, term.envelope.conj()))
        for m, env in mats:
            w_env = _signed_frequency(env)
            amp = _scalar_amplitude(env)
            rows, cols = np.nonzero(m)
            for a, c in zip(rows, cols):
                nu = float(np.round(h[a] - h[c] + w_env, 9))
                if nu not in comps:
                    comps[nu] = np.zeros((me.dim, me.dim), dtype=complex)
                comps[nu][a, c] += amp * m[a, c]
    out = np.zeros((me.dim, me.dim), dtype=complex)
    for nu, Hw in comps.items():
        if nu > tol:
            out += (Hw @ Hw.conj().T - Hw.conj().T @ Hw) / nu
    same = np.abs(h[:, None] - h[None, :]) < tol
    out = np.where(same, out, 0.0)
    return (out + out.conj().T) / 2
