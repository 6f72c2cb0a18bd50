"""Switched unconventional-blockade pumping plus a three-body antiblockade channel.

Atoms carry qubit levels 0, 1 and two Rydberg levels r, p.  Step 1 drives
r <-> 0 with a resonant weak field and a strong detuned one, step 2 does the
same on r <-> 1; a p <-> |+> field detuned by the p-p interaction runs at all
times and converts |+++> into |ppp>.  Both Rydberg levels decay to 0 and 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from rydghz.core_ops import QUBIT_RP, embed, matrix_unit, pair_interaction, sigma
from rydghz.lindblad import (
    ComplexExp,
    Constant,
    Dissipator,
    HTerm,
    MasterEq,
    Schedule,
    second_order_shift,
)
from rydghz.scheme1 import ConstraintError

N_ATOMS = 3
DIM = QUBIT_RP.d**N_ATOMS
SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class Scheme2Params:
    """Rates in units of the reference rate Omega_b.

    ``U_rr`` and ``U_pp`` default to ``delta1`` and ``delta2``; other values are
    rejected unless ``override_constraints`` is set.
    """

    omega_a: float = 0.02
    omega_b: float = 1.0
    omega_p: float = 1.0
    delta1: float = 300.0
    delta2: float = 80.0
    U_rr: float | None = None
    U_pp: float | None = None
    gamma: float = 0.01
    N: int = 64
    T_total: float = 50000.0
    override_constraints: bool = False

    def __post_init__(self):
        for key in ("omega_a", "omega_b", "omega_p", "delta1", "delta2", "gamma"):
            if getattr(self, key) < 0:
                raise ConstraintError(key, "must be non-negative")
        if int(self.N) != self.N or self.N < 1:
            raise ConstraintError("N", f"must be a positive integer, got {self.N}")
        if not self.T_total > 0:
            raise ConstraintError("T_total", "must be positive")
        u_rr = self.delta1 if self.U_rr is None else self.U_rr
        u_pp = self.delta2 if self.U_pp is None else self.U_pp
        if u_rr < 0 or u_pp < 0:
            raise ConstraintError("U_rr" if u_rr < 0 else "U_pp", "must be non-negative")
        if not self.override_constraints:
            pairs = (("U_rr", u_rr, "delta1", self.delta1), ("U_pp", u_pp, "delta2", self.delta2))
            for key, val, dkey, want in pairs:
                if not math.isclose(val, want, rel_tol=1e-12, abs_tol=1e-12):
                    raise ConstraintError(key, f"{val} must equal {dkey} = {want}")
        object.__setattr__(self, "U_rr", float(u_rr))
        object.__setattr__(self, "U_pp", float(u_pp))
        object.__setattr__(self, "N", int(self.N))

    @property
    def segment_time(self) -> float:
        return self.T_total / self.N


def _check_step(step: int) -> str:
    if step not in (1, 2):
        raise ValueError(f"step must be 1 or 2, got {step!r}")
    return "0" if step == 1 else "1"


def _basis(word: str) -> np.ndarray:
    return QUBIT_RP.basis_state(word)


def _plus_local() -> np.ndarray:
    """Local ``|p><+|`` times sqrt 2, i.e. ``|p><0| + |p><1|``."""
    d = QUBIT_RP.d
    ip = QUBIT_RP.index("p")
    return matrix_unit(d, ip, 0) + matrix_unit(d, ip, 1)


def _plus_drive() -> np.ndarray:
    """``sum_j sqrt(2) |p>_j <+|``."""
    return sum(embed(_plus_local(), j, N_ATOMS) for j in range(N_ATOMS))


def _interactions(p: Scheme2Params) -> np.ndarray:
    return p.U_rr * pair_interaction(QUBIT_RP, "r", N_ATOMS) + p.U_pp * pair_interaction(
        QUBIT_RP, "p", N_ATOMS
    )


def _decay(p: Scheme2Params) -> list[Dissipator]:
    if p.gamma <= 0:
        return []
    amp = math.sqrt(p.gamma / 2)
    return [
        Dissipator(amp * sigma(QUBIT_RP, g, e, j, N_ATOMS))
        for j in range(N_ATOMS)
        for e in ("r", "p")
        for g in ("0", "1")
    ]


def antiblockade_rate(omega_p: float, delta2: float) -> float:
    """Third-order coupling ``12 sqrt(2) Omega_p^3 / Delta_2^2`` between |+++> and |ppp>."""
    if delta2 <= 0:
        raise ValueError(f"delta2 must be positive, got {delta2}")
    return 12 * SQRT2 * omega_p**3 / delta2**2


def full_hamiltonian_terms(p: Scheme2Params, step: int) -> list[HTerm]:
    g = _check_step(step)
    s_rg = sum(sigma(QUBIT_RP, "r", g, j, N_ATOMS) for j in range(N_ATOMS))
    terms = []
    if p.omega_a:
        terms.append(HTerm(p.omega_a * s_rg, Constant(), add_conjugate=True))
    if p.omega_b:
        terms.append(HTerm(p.omega_b * s_rg, ComplexExp(p.delta1, -1), add_conjugate=True))
    if p.omega_p:
        terms.append(HTerm(p.omega_p * _plus_drive(), ComplexExp(p.delta2, -1), add_conjugate=True))
    terms.append(HTerm(_interactions(p)))
    return terms


def build_step_full(p: Scheme2Params, step: int, cancel_light_shifts: bool = True) -> MasterEq:
    """Full 64-dimensional model of one switching step.

    The run is carried out in the frame co-rotating with the r-r and p-p
    interactions.  With ``cancel_light_shifts`` the static second-order shifts
    produced by the two detuned fields are subtracted, which stands in for the
    external compensation the scheme assumes; without it the p-field shift acts
    as a transverse field on every qubit and the target is not stationary.
    """
    terms = full_hamiltonian_terms(p, step)
    frame = np.real(np.diag(_interactions(p)))
    me = MasterEq(
        dim=DIM,
        hterms=terms,
        dissipators=_decay(p),
        label=f"scheme2_full_step{step}",
        f_max=max(p.delta1, p.delta2, p.U_rr, p.U_pp),
        frame=frame,
    )
    if not cancel_light_shifts:
        return me
    shift = second_order_shift(me)
    if np.max(np.abs(shift)) == 0:
        return me
    return MasterEq(
        dim=DIM,
        hterms=[*terms, HTerm(-shift)],
        dissipators=me.dissipators,
        label=me.label,
        f_max=me.f_max,
        frame=frame,
    )


def urp_hamiltonian(p: Scheme2Params, step: int) -> np.ndarray:
    """Resonant pumping of the two-spectator configurations into one Rydberg excitation.

    Step 1 acts on states with two atoms in 1 and one in 0, step 2 on two in 0
    and one in 1.
    """
    g = _check_step(step)
    spectator = "1" if step == 1 else "0"
    h = np.zeros((DIM, DIM), dtype=complex)
    for j in range(N_ATOMS):
        ground = [spectator] * N_ATOMS
        ground[j] = g
        excited = list(ground)
        excited[j] = "r"
        h += p.omega_a * np.outer(_basis("".join(ground)), _basis("".join(excited)))
    return h + h.conj().T


def antiblockade_hamiltonian(p: Scheme2Params) -> np.ndarray:
    v = collective_basis_s2()
    rate = antiblockade_rate(p.omega_p, p.delta2)
    h = rate * np.outer(v["+++"], v["ppp"].conj())
    return h + h.conj().T


def build_step_effective(p: Scheme2Params, step: int) -> MasterEq:
    h = urp_hamiltonian(p, step) + antiblockade_hamiltonian(p)
    return MasterEq(
        dim=DIM,
        hterms=[HTerm(h)],
        dissipators=_decay(p),
        label=f"scheme2_effective_step{step}",
    )


def build_switching_schedule(p: Scheme2Params, model: str = "effective", **kwargs) -> Schedule:
    """N equal segments alternating step 1, step 2, ... starting with step 1."""
    if model == "full":
        builder = build_step_full
    elif model == "effective":
        builder = build_step_effective
    else:
        raise ValueError(f"model must be 'full' or 'effective', got {model!r}")
    models = {"step1": builder(p, 1, **kwargs), "step2": builder(p, 2, **kwargs)}
    tau = p.segment_time
    if p.N % 2 == 0:
        return Schedule(models, ((tau, "step1"), (tau, "step2")), repeats=p.N // 2)
    segs = tuple((tau, "step1" if i % 2 == 0 else "step2") for i in range(p.N))
    return Schedule(models, segs)


def collective_basis_s2() -> dict[str, np.ndarray]:
    """Named symmetric states used to analyse the two steps and the p channel.

    ``S1``, ``S2`` and ``ppp`` live on the p level, which is where the
    antiblockade field puts population; ``rrr`` is the triple r excitation.
    """
    b = _basis
    r3 = math.sqrt(3.0)
    out = {
        "000": b("000"),
        "111": b("111"),
        "D1": (b("00r") + b("0r0") + b("r00")) / r3,
        "D2": (b("0rr") + b("r0r") + b("rr0")) / r3,
        "T1": (b("10r") + b("1r0")) / SQRT2,
        "T2": (b("01r") + b("r10")) / SQRT2,
        "T3": (b("0r1") + b("r01")) / SQRT2,
        "T1b": b("1rr"),
        "T2b": b("r1r"),
        "T3b": b("rr1"),
        "rrr": b("rrr"),
        "ppp": b("ppp"),
        "GHZ+": (b("000") + b("111")) / SQRT2,
        "GHZ-": (b("000") - b("111")) / SQRT2,
    }
    out["D+"] = (out["D1"] + out["D2"]) / SQRT2
    out["D-"] = (out["D1"] - out["D2"]) / SQRT2
    for n in (1, 2, 3):
        t, tb = out[f"T{n}"], out[f"T{n}b"]
        out[f"T{n}+"] = (t + tb) / SQRT2
        out[f"T{n}-"] = (t - tb) / SQRT2
    plus = np.array([1, 1, 0, 0], dtype=complex) / SQRT2
    minus = np.array([1, -1, 0, 0], dtype=complex) / SQRT2
    pl = np.array([0, 0, 0, 1], dtype=complex)

    def prod(*f):
        return np.kron(np.kron(f[0], f[1]), f[2])

    out["+++"] = prod(plus, plus, plus)
    out["S1"] = (prod(plus, plus, pl) + prod(plus, pl, plus) + prod(pl, plus, plus)) / r3
    out["S2"] = (prod(plus, pl, pl) + prod(pl, plus, pl) + prod(pl, pl, plus)) / r3
    out["+--"] = prod(plus, minus, minus)
    out["-+-"] = prod(minus, plus, minus)
    out["--+"] = prod(minus, minus, plus)
    return out


def _frame_components(p: Scheme2Params, step: int) -> dict[float, np.ndarray]:
    """``H_S(t) = sum_w H_w exp(i w t)`` in the frame of the r-r interaction."""
    g = _check_step(step)
    s_rg = sum(sigma(QUBIT_RP, "r", g, j, N_ATOMS) for j in range(N_ATOMS))
    h = np.real(np.diag(p.U_rr * pair_interaction(QUBIT_RP, "r", N_ATOMS)))
    comps: dict[float, np.ndarray] = {}
    for amp, w_env in ((p.omega_a, 0.0), (p.omega_b, -p.delta1)):
        for m, w in ((amp * s_rg, w_env), (amp * s_rg.conj().T, -w_env)):
            rows, cols = np.nonzero(m)
            for a, c in zip(rows, cols):
                nu = float(np.round(h[a] - h[c] + w, 9))
                comps.setdefault(nu, np.zeros((DIM, DIM), dtype=complex))[a, c] += m[a, c]
    return comps


def verify_hs1_decomposition(p: Scheme2Params) -> dict[str, float]:
    """Matrix-element checks of the step-1 Hamiltonian split into static and fast parts.

    Returns the absolute deviation of each checked element plus ``max``.
    """
    comps = _frame_components(p, 1)
    static = comps.get(0.0, np.zeros((DIM, DIM), dtype=complex))
    fast = comps.get(p.delta1, np.zeros((DIM, DIM), dtype=complex))
    v = collective_basis_s2()
    a, b = p.omega_a, p.omega_b
    r3 = math.sqrt(3.0)

    def el(m, x, y):
        return complex(v[x].conj() @ m @ v[y])

    hs1 = urp_hamiltonian(p, 1)
    report = {}
    report["urp_part"] = float(
        np.max(np.abs(_restrict(static, hs1) - hs1), initial=0.0)
    )
    checks = [
        ("<000|H|D1>", el(static, "000", "D1"), r3 * a),
        ("<D1|H|D2>", el(static, "D1", "D2"), 2 * b),
        ("<100|H|T1>", complex(_basis("100") @ static @ v["T1"]), SQRT2 * a),
        ("<1rr|H|T1>", el(static, "T1b", "T1"), SQRT2 * b),
        ("<010|H|T2>", complex(_basis("010") @ static @ v["T2"]), SQRT2 * a),
        ("<r1r|H|T2>", el(static, "T2b", "T2"), SQRT2 * b),
        ("<001|H|T3>", complex(_basis("001") @ static @ v["T3"]), SQRT2 * a),
        ("<rr1|H|T3>", el(static, "T3b", "T3"), SQRT2 * b),
        ("fast <110|H|11r>", complex(_basis("110") @ fast @ _basis("11r")), b),
        ("fast <D2|H|D1>", el(fast, "D2", "D1"), 2 * a),
        ("fast <rrr|H|D2>", el(fast, "rrr", "D2"), r3 * b),
    ]
    bpart = _omega_b_static(static, p)
    checks += [
        ("<D+|Hb|D+>", el(bpart, "D+", "D+"), 2 * b),
        ("<D-|Hb|D->", el(bpart, "D-", "D-"), -2 * b),
    ]
    for n in (1, 2, 3):
        checks.append((f"<T{n}+|Hb|T{n}+>", el(bpart, f"T{n}+", f"T{n}+"), SQRT2 * b))
        checks.append((f"<T{n}-|Hb|T{n}->", el(bpart, f"T{n}-", f"T{n}-"), -SQRT2 * b))
    for name, got, want in checks:
        report[name] = abs(got - want)
    report["max"] = max(report.values())
    return report


def _restrict(m: np.ndarray, like: np.ndarray) -> np.ndarray:
    return np.where(np.abs(like) > 0, m, 0)


def _omega_b_static(static: np.ndarray, p: Scheme2Params) -> np.ndarray:
    """Static part restricted to transitions between Rydberg-occupied states."""
    ir = QUBIT_RP.index("r")
    occ = np.array(
        [
            sum(1 for k in np.unravel_index(i, (QUBIT_RP.d,) * N_ATOMS) if k == ir)
            for i in range(DIM)
        ]
    )
    mask = (occ[:, None] > 0) & (occ[None, :] > 0)
    return np.where(mask, static, 0)


def mixed_initial_state_6() -> np.ndarray:
    words = ("100", "010", "001", "011", "101", "110")
    rho = np.zeros((DIM, DIM), dtype=complex)
    for w in words:
        k = _basis(w)
        rho += np.outer(k, k.conj())
    return rho / len(words)


def observables() -> list[tuple[str, np.ndarray]]:
    v = collective_basis_s2()
    return [("P_GHZ-", v["GHZ-"]), ("P_GHZ+", v["GHZ+"]), ("P_000", v["000"]), ("P_111", v["111"])]


__all__ = [
    "Scheme2Params",
    "antiblockade_rate",
    "antiblockade_hamiltonian",
    "build_step_full",
    "build_step_effective",
    "build_switching_schedule",
    "collective_basis_s2",
    "full_hamiltonian_terms",
    "mixed_initial_state_6",
    "observables",
    "urp_hamiltonian",
    "verify_hs1_decomposition",
]
