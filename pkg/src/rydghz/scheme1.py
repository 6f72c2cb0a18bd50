"""Polychromatic-drive scheme: three (or five) g/e/r atoms on a ring, three
detuned g-r fields, a resonant r-e laser and fast e -> g decay.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from rydghz.core_ops import (
    GER,
    GR,
    LevelScheme,
    lift_state,
    matrix_unit,
    pair_interaction,
    projected_transition,
    sigma,
)
from rydghz.lindblad import (
    ComplexExp,
    Constant,
    Dissipator,
    Gaussian,
    HTerm,
    MasterEq,
    Product,
    integrate,
)

SQRT5 = math.sqrt(5.0)


class ConstraintError(ValueError):
    """Parameter violates a default detuning/interaction constraint."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


@dataclass(frozen=True)
class GaussianPulse:
    amplitude: float
    center: float
    width: float


@dataclass(frozen=True)
class Scheme1Params:
    """Rates in units of the reference rate Omega_2.

    Unset detunings are filled from ``Delta2 = U``, ``Delta3 = 2U - Delta1``
    and ``Delta1 = 2 Omega2`` (3 atoms) or ``(1 + sqrt 5) Omega2`` (5 atoms).
    Explicit values that break these rules raise ``ConstraintError`` unless
    ``override_constraints`` is set.
    """

    omega0: float = 0.77
    omega1: float = 0.05
    omega2: float = 1.0
    omega3: float = 0.05
    delta1: float | None = None
    delta2: float | None = None
    delta3: float | None = None
    U: float = 300.0
    Gamma: float = 6.0
    gamma: float = 0.0
    n_atoms: int = 3
    pulse: GaussianPulse | None = None
    gamma_eff_override: float | None = None
    override_constraints: bool = False

    def __post_init__(self):
        if self.n_atoms not in (3, 5):
            raise ConstraintError("n_atoms", f"must be 3 or 5, got {self.n_atoms}")
        for key in ("omega0", "omega1", "omega2", "omega3", "U", "Gamma", "gamma"):
            if getattr(self, key) < 0:
                raise ConstraintError(key, "must be non-negative")
        if self.omega0 > 0 and self.Gamma <= 0:
            raise ConstraintError("Gamma", "must be positive when omega0 > 0")
        d1_rule = 2 * self.omega2 if self.n_atoms == 3 else (1 + SQRT5) * self.omega2
        d1 = d1_rule if self.delta1 is None else self.delta1
        d2 = self.U if self.delta2 is None else self.delta2
        d3 = 2 * self.U - d1 if self.delta3 is None else self.delta3
        if not self.override_constraints:
            for key, val, want in (
                ("delta1", d1, d1_rule),
                ("delta2", d2, self.U),
                ("delta3", d3, 2 * self.U - d1),
            ):
                if not math.isclose(val, want, rel_tol=1e-12, abs_tol=1e-12):
                    raise ConstraintError(key, f"{val} breaks the antiblockade rule (expected {want})")
        object.__setattr__(self, "delta1", float(d1))
        object.__setattr__(self, "delta2", float(d2))
        object.__setattr__(self, "delta3", float(d3))

    @property
    def gamma_eff(self) -> float:
        if self.gamma_eff_override is not None:
            return self.gamma_eff_override
        return 4 * self.omega0**2 / self.Gamma if self.Gamma > 0 else 0.0

    def drives(self):
        """``(alpha, Omega_alpha, Delta_alpha)`` for the three g-r fields."""
        return (
            (1, self.omega1, self.delta1),
            (2, self.omega2, self.delta2),
            (3, self.omega3, self.delta3),
        )


def _pulse_envelope(p: Scheme1Params) -> Gaussian:
    return Gaussian(p.pulse.amplitude, p.pulse.center, p.pulse.width)


def _drive_term(matrix: np.ndarray, amp: float, env_phase, pulse: Gaussian | None) -> HTerm:
    if pulse is None:
        return HTerm(amp * matrix, env_phase, add_conjugate=True)
    return HTerm(matrix, Product((pulse, env_phase)), add_conjugate=True)


def build_full_3atom(p: Scheme1Params, rotating_frame: bool = True) -> MasterEq:
    """Full three-atom model over (g, e, r) levels, dimension 27.

    With ``rotating_frame`` the run is carried out, and populations reported, in
    the frame co-rotating with the all-pairs interaction, which is the frame the
    effective models live in.
    """
    if p.n_atoms != 3:
        raise ConstraintError("n_atoms", "the full model is built for 3 atoms only")
    n = 3
    s_rg = sum(sigma(GER, "r", "g", j, n) for j in range(n))
    s_re = sum(sigma(GER, "r", "e", j, n) for j in range(n))
    pulse = _pulse_envelope(p) if p.pulse is not None else None
    terms = []
    for alpha, amp, delta in p.drives():
        env = ComplexExp(delta, -1)
        use_pulse = pulse if alpha in (1, 3) else None
        if amp == 0 and use_pulse is None:
            continue
        terms.append(_drive_term(s_rg, amp, env, use_pulse))
    if p.omega0:
        terms.append(HTerm(p.omega0 * s_re, Constant(), add_conjugate=True))
    vdw = p.U * pair_interaction(GER, "r", n)
    terms.append(HTerm(vdw))
    diss = [Dissipator(math.sqrt(p.Gamma) * sigma(GER, "g", "e", j, n)) for j in range(n)]
    if p.gamma > 0:
        diss += [Dissipator(math.sqrt(p.gamma) * sigma(GER, "g", "r", j, n)) for j in range(n)]
    return MasterEq(
        dim=27,
        hterms=terms,
        dissipators=diss,
        label="scheme1_full",
        f_max=max(p.U, p.delta1, p.delta2, p.delta3, p.Gamma),
        frame=np.real(np.diag(vdw)) if rotating_frame else None,
    )


def _neighbor_weight(m: int, n: int, literal_prefactor: bool) -> float:
    return 2.0 ** abs(m - n) if literal_prefactor else 1.0


def build_effective(p: Scheme1Params, literal_prefactor: bool = False) -> MasterEq:
    """Effective g/r model after eliminating e: neighbor-conditioned drives and
    engineered decay ``sqrt(Gamma_eff) P0 |g><r| P0`` on every site, plus plain
    ``sqrt(gamma) |g><r|`` decay when ``gamma > 0``.

    Each ordered neighbor configuration (m, n) carries ``Omega_{m+n+1}``;
    ``literal_prefactor`` multiplies the mixed ones by 2 instead.
    """
    n_at = p.n_atoms
    if n_at not in (3, 5):
        raise ConstraintError("n_atoms", f"unsupported {n_at}")
    pulse = _pulse_envelope(p) if p.pulse is not None else None
    amps = {1: p.omega1, 2: p.omega2, 3: p.omega3}
    terms = []
    for m in (0, 1):
        for nn in (0, 1):
            alpha = m + nn + 1
            op = sum(projected_transition(j, ("r", "g"), m, nn, GR, n_at) for j in range(n_at))
            op = _neighbor_weight(m, nn, literal_prefactor) * op
            k = m + nn - 1
            env = Constant() if k == 0 else ComplexExp(p.delta1, k)
            use_pulse = pulse if alpha in (1, 3) else None
            if amps[alpha] == 0 and use_pulse is None:
                continue
            terms.append(_drive_term(op, amps[alpha], env, use_pulse))
    diss = _dissipators_eff(n_at, p.gamma_eff)
    if p.gamma > 0:
        diss += [Dissipator(math.sqrt(p.gamma) * sigma(GR, "g", "r", j, n_at)) for j in range(n_at)]
    return MasterEq(
        dim=2**n_at,
        hterms=terms,
        dissipators=diss,
        label=f"scheme1_effective_{n_at}",
    )


def collective_states(n_atoms: int = 3) -> dict[str, np.ndarray]:
    """GHZ and single/double-excitation collective states in the g/r basis."""
    if n_atoms not in (3, 5):
        raise ValueError(f"collective states defined for 3 or 5 atoms, got {n_atoms}")
    b = lambda w: GR.basis_state(w)  # noqa: E731
    g, r = "g" * n_atoms, "r" * n_atoms
    out = {
        "GHZ+": (b(g) + b(r)) / math.sqrt(2),
        "GHZ-": (b(g) - b(r)) / math.sqrt(2),
    }
    if n_atoms == 5:
        return out
    doubles = b("grr") + b("rgr") + b("rrg")
    singles = b("ggr") + b("grg") + b("rgg")
    for s, name in ((1, "+"), (-1, "-")):
        out["E1" + name] = (doubles + s * singles) / math.sqrt(6)
        out["E2" + name] = (b("rrg") - b("grr") + s * b("rgg") - s * b("ggr")) / 2
        out["E3" + name] = (
            2 * b("rgr") - b("grr") - b("rrg") - s * 2 * b("grg") + s * b("ggr") + s * b("rgg")
        ) / (2 * math.sqrt(3))
    return out


def _dissipators_eff(n_at: int, ge: float) -> list[Dissipator]:
    return [
        Dissipator(math.sqrt(ge) * projected_transition(j, ("g", "r"), 0, 0, GR, n_at))
        for j in range(n_at)
    ]


def collective_hamiltonian(p: Scheme1Params) -> np.ndarray:
    if not math.isclose(p.omega1, p.omega3, rel_tol=1e-12, abs_tol=1e-15):
        raise ConstraintError("omega3", "collective model assumes omega1 == omega3")
    st = collective_states(3)
    proj = lambda a, b: np.outer(st[a], st[b].conj())  # noqa: E731
    drive = math.sqrt(3) * p.omega1 * proj("GHZ+", "E1+")
    H = drive + drive.conj().T
    H += p.omega2 * (proj("E2+", "E2+") - proj("E2-", "E2-") + proj("E3+", "E3+") - proj("E3-", "E3-"))
    return H


def build_collective_model(p: Scheme1Params) -> MasterEq:
    """Time-independent 8-dim model on the collective basis plus engineered decay."""
    if p.n_atoms != 3:
        raise ConstraintError("n_atoms", "collective model is for 3 atoms")
    H = collective_hamiltonian(p)
    return MasterEq(
        dim=8,
        hterms=[HTerm(H)],
        dissipators=_dissipators_eff(3, p.gamma_eff),
        label="scheme1_collective",
    )


def resonant_hamiltonian(n_atoms: int, omega2: float = 1.0) -> np.ndarray:
    """Static part of the effective drive: one excited neighbor, weight omega2."""
    op = sum(
        projected_transition(j, ("r", "g"), m, nn, GR, n_atoms)
        for j in range(n_atoms)
        for m, nn in ((0, 1), (1, 0))
    )
    op = omega2 * op
    return op + op.conj().T


def resonant_spectrum(n_atoms: int, omega2: float = 1.0) -> np.ndarray:
    if n_atoms not in (3, 5):
        raise ValueError(f"n_atoms must be 3 or 5, got {n_atoms}")
    return np.linalg.eigvalsh(resonant_hamiltonian(n_atoms, omega2))


def single_atom_model(omega0: float, Gamma: float) -> MasterEq:
    """One (g, e, r) atom: resonant r-e coupling and e -> g decay."""
    s_re = matrix_unit(3, 2, 1)
    return MasterEq(
        dim=3,
        hterms=[HTerm(omega0 * s_re, add_conjugate=True)],
        dissipators=[Dissipator(math.sqrt(Gamma) * matrix_unit(3, 0, 1))],
        label="single_atom_ger",
    )


def gamma_eff_oracle(
    omega0: float,
    Gamma: float,
    t_end: float | None = None,
    dt: float | None = None,
    enforce_regime: bool = True,
) -> tuple[float, float]:
    """Fitted decay rate of the Rydberg population for one atom versus 4 Omega0^2 / Gamma.

    The exact three-level equation is propagated from ``|r><r|`` and
    ``log P_r`` is fitted by least squares where ``0.2 <= P_r <= 0.8``.
    """
    if Gamma <= 0:
        raise ValueError("Gamma must be positive")
    if enforce_regime and Gamma < 5 * omega0:
        raise ValueError(f"Gamma={Gamma} is outside the elimination regime Gamma >= 5 omega0")
    closed = 4 * omega0**2 / Gamma
    if t_end is None:
        t_end = 10.0 / Gamma + (4.0 / closed if closed > 0 else 0.0)
    if dt is None:
        dt = 0.02 / max(Gamma, omega0)
    me = single_atom_model(omega0, Gamma)
    rho0 = np.diag([0, 0, 1]).astype(complex)
    stride = max(1, int(round(t_end / dt / 2000)))
    ts = integrate(
        me, rho0, t_end, dt=dt, observables=[("P_r", np.diag([0, 0, 1.0]))], sample_stride=stride
    )
    pr = ts["P_r"]
    if np.max(np.abs(pr - 1.0)) < 1e-12:
        return 0.0, closed
    win = (pr >= 0.2) & (pr <= 0.8)
    if win.sum() < 3:
        raise ValueError(f"fit window 0.2 <= P_r <= 0.8 is empty by t_end={t_end}")
    slope = np.polyfit(ts.times[win], np.log(pr[win]), 1)[0]
    return float(-slope), float(closed)


def mixed_initial_state(n_atoms: int, scheme: LevelScheme = GR) -> np.ndarray:
    """Uniform mixture of the 2^n classical g/r product states."""
    if n_atoms not in (3, 5):
        raise ValueError(f"n_atoms must be 3 or 5, got {n_atoms}")
    diag = np.zeros(scheme.d**n_atoms)
    for i in range(2**n_atoms):
        e = np.zeros(2**n_atoms)
        e[i] = 1.0
        diag += np.abs(lift_state(e, n_atoms, GR, scheme)) ** 2
    return np.diag(diag / 2**n_atoms).astype(complex)


def observables(n_atoms: int = 3, scheme: LevelScheme = GR) -> list[tuple[str, np.ndarray]]:
    st = collective_states(n_atoms)
    return [(f"P_{k}", lift_state(st[k], n_atoms, GR, scheme)) for k in ("GHZ-", "GHZ+")]


__all__ = [
    "ConstraintError",
    "GaussianPulse",
    "Scheme1Params",
    "build_full_3atom",
    "build_effective",
    "build_collective_model",
    "collective_states",
    "resonant_spectrum",
    "gamma_eff_oracle",
    "mixed_initial_state",
    "observables",
]
