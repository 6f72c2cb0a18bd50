"""Scenario documents, named presets, CSV I/O and trajectory comparison.

A scenario document is a flat list of ``key = value`` lines.  ``#`` starts a
comment, dotted keys (``params.omega0``) address nested fields.  Example::

    scheme = scheme1_full
    params.omega1 = 0.05
    run.t_end = 200
    observables = P_GHZ-, P_GHZ+
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from rydghz import scheme1, scheme2
from rydghz.core_ops import GER, GR, QUBIT_RP, lift_state
from rydghz.lindblad import MasterEq, Schedule, TimeSeries, integrate
from rydghz.scheme1 import ConstraintError, GaussianPulse, Scheme1Params
from rydghz.scheme2 import Scheme2Params

SCHEMES = (
    "scheme1_full",
    "scheme1_effective",
    "scheme1_collective",
    "scheme2_full",
    "scheme2_effective",
)
UNITS = ("reference", "MHz_2pi")
# reference rate in units of 2 pi x MHz for the physical relabeling
REFERENCE_MHZ = {"scheme1": 1.0, "scheme2": 3.0}


class ScenarioError(ValueError):
    """Configuration problem, located by line number and key where possible."""

    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        self.line = line
        self.key = key
        where = f"line {line}: " if line is not None else ""
        what = f"{key}: " if key is not None else ""
        super().__init__(f"{where}{what}{message}")


@dataclass(frozen=True)
class InitialState:
    """``mixed_default``, a named pure ``state``, or normalised diagonal ``weights``."""

    kind: str = "mixed_default"
    state: str | None = None
    weights: tuple[tuple[str, float], ...] = ()


@dataclass(frozen=True)
class Scenario:
    scheme: str
    params: Scheme1Params | Scheme2Params
    initial: InitialState = InitialState()
    t_end: float | None = None
    dt: float | None = None
    sample_stride: int = 1
    observables: tuple[str, ...] = ()
    output: str | None = None
    units: str = "reference"
    literal_prefactor: bool = False
    cancel_light_shifts: bool = True

    @property
    def family(self) -> str:
        return self.scheme.split("_")[0]


# --------------------------------------------------------------------------
# value coercion
# --------------------------------------------------------------------------


def _as_float(text: str) -> float:
    v = float(text)
    if not math.isfinite(v):
        raise ValueError(f"{text!r} is not finite")
    return v


def _as_int(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ValueError(f"{text!r} is not an integer") from None


def _as_bool(text: str) -> bool:
    low = text.lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ValueError(f"{text!r} is not a boolean")


def _optional(conv):
    def inner(text: str):
        return None if text.lower() == "none" else conv(text)

    return inner


def _as_list(text: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in text.split(",") if x.strip())


def _as_weights(text: str) -> tuple[tuple[str, float], ...]:
    out = []
    for item in _as_list(text):
        word, sep, w = item.partition(":")
        if not sep:
            raise ValueError(f"weight entry {item!r} is not word:weight")
        out.append((word.strip(), _as_float(w)))
    return tuple(out)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return "none"
    if isinstance(v, float):
        return repr(v)
    return str(v)


S1_PARAMS = {
    "omega0": _as_float,
    "omega1": _as_float,
    "omega2": _as_float,
    "omega3": _as_float,
    "delta1": _optional(_as_float),
    "delta2": _optional(_as_float),
    "delta3": _optional(_as_float),
    "U": _as_float,
    "Gamma": _as_float,
    "gamma": _as_float,
    "n_atoms": _as_int,
    "gamma_eff_override": _optional(_as_float),
}
PULSE_KEYS = {"amplitude": _as_float, "center": _as_float, "width": _as_float}
S2_PARAMS = {
    "omega_a": _as_float,
    "omega_b": _as_float,
    "omega_p": _as_float,
    "delta1": _as_float,
    "delta2": _as_float,
    "U_rr": _optional(_as_float),
    "U_pp": _optional(_as_float),
    "gamma": _as_float,
    "N": _as_int,
    "T_total": _as_float,
}
TOP_KEYS = {
    "scheme": str,
    "override_constraints": _as_bool,
    "observables": _as_list,
    "output": _optional(str),
    "units": str,
    "initial.kind": str,
    "initial.state": _optional(str),
    "initial.weights": _as_weights,
    "run.t_end": _optional(_as_float),
    "run.dt": _optional(_as_float),
    "run.sample_stride": _as_int,
    "options.literal_prefactor": _as_bool,
    "options.cancel_light_shifts": _as_bool,
}


def _schema(family: str) -> dict:
    keys = dict(TOP_KEYS)
    if family == "scheme1":
        keys.update({f"params.{k}": v for k, v in S1_PARAMS.items()})
        keys.update({f"params.pulse.{k}": v for k, v in PULSE_KEYS.items()})
    else:
        keys.update({f"params.{k}": v for k, v in S2_PARAMS.items()})
    return keys


# --------------------------------------------------------------------------
# parse / render
# --------------------------------------------------------------------------


def _tokenize(text: str) -> list[tuple[int, str, str]]:
    entries = []
    seen: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ScenarioError("expected 'key = value'", lineno)
        if key in seen:
            raise ScenarioError(f"duplicate key (first set on line {seen[key]})", lineno, key)
        seen[key] = lineno
        entries.append((lineno, key, value))
    return entries


def parse_scenario(text: str) -> Scenario:
    entries = _tokenize(text)
    lines = {k: n for n, k, _ in entries}
    scheme = next((v for _, k, v in entries if k == "scheme"), None)
    if scheme is None:
        raise ScenarioError("missing required key", None, "scheme")
    if scheme not in SCHEMES:
        raise ScenarioError(f"unknown scheme {scheme!r}, expected one of {SCHEMES}", lines["scheme"], "scheme")
    family = scheme.split("_")[0]
    schema = _schema(family)
    vals = {}
    for n, key, raw in entries:
        if key not in schema:
            raise ScenarioError("unknown key", n, key)
        try:
            vals[key] = schema[key](raw)
        except ValueError as exc:
            raise ScenarioError(f"bad value: {exc}", n, key) from None

    def line_of(k):
        return lines.get(k)

    units = vals.get("units", "reference")
    if units not in UNITS:
        raise ScenarioError(f"units must be one of {UNITS}", line_of("units"), "units")

    kind = vals.get("initial.kind", "mixed_default")
    initial = InitialState(kind, vals.get("initial.state"), vals.get("initial.weights", ()))
    if kind not in ("mixed_default", "pure", "diagonal"):
        raise ScenarioError("must be mixed_default, pure or diagonal", line_of("initial.kind"), "initial.kind")
    if kind == "pure" and not initial.state:
        raise ScenarioError("pure initial state needs initial.state", line_of("initial.kind"), "initial.state")
    if kind == "diagonal" and not initial.weights:
        raise ScenarioError("diagonal initial state needs initial.weights", line_of("initial.kind"), "initial.weights")

    pkw = {
        k[len("params.") :]: v
        for k, v in vals.items()
        if k.startswith("params.") and not k.startswith("params.pulse.")
    }
    pkw["override_constraints"] = vals.get("override_constraints", False)
    pulse_keys = [k for k in vals if k.startswith("params.pulse.")]
    if pulse_keys:
        missing = [k for k in PULSE_KEYS if f"params.pulse.{k}" not in vals]
        if missing:
            raise ScenarioError(
                f"pulse needs amplitude, center and width (missing {', '.join(missing)})",
                line_of(pulse_keys[0]),
                pulse_keys[0],
            )
        pkw["pulse"] = GaussianPulse(*(vals[f"params.pulse.{k}"] for k in PULSE_KEYS))
    cls = Scheme1Params if family == "scheme1" else Scheme2Params
    try:
        params = cls(**pkw)
    except ConstraintError as exc:
        key = f"params.{exc.key}"
        line = line_of(key) or line_of("override_constraints")
        raise ScenarioError(f"constraint violated: {exc}", line, key) from None

    s = Scenario(
        scheme=scheme,
        params=params,
        initial=initial,
        t_end=vals.get("run.t_end"),
        dt=vals.get("run.dt"),
        sample_stride=vals.get("run.sample_stride", 1),
        observables=vals.get("observables", ()),
        output=vals.get("output"),
        units=units,
        literal_prefactor=vals.get("options.literal_prefactor", False),
        cancel_light_shifts=vals.get("options.cancel_light_shifts", True),
    )
    for key, problem in _semantic_problems(s):
        raise ScenarioError(problem, line_of(key), key)
    return s


def _semantic_problems(s: Scenario):
    if s.sample_stride < 1:
        yield "run.sample_stride", "must be >= 1"
    if s.dt is not None and not s.dt > 0:
        yield "run.dt", "must be positive"
    if s.t_end is not None and not s.t_end > 0:
        yield "run.t_end", "must be positive"
    if s.family == "scheme1" and s.t_end is None:
        yield "run.t_end", "required for scheme 1 runs"
    if s.scheme in ("scheme1_full", "scheme1_collective") and s.params.n_atoms != 3:
        yield "params.n_atoms", f"{s.scheme} is built for 3 atoms only"
    if s.scheme == "scheme1_collective" and s.params.omega1 != s.params.omega3:
        yield "params.omega3", "collective model needs omega1 == omega3"
    if s.family == "scheme2" and s.t_end is not None and s.t_end > s.params.T_total * (1 + 1e-12):
        yield "run.t_end", f"exceeds params.T_total = {s.params.T_total}"
    for name in s.observables:
        try:
            _observable_vector(s, name)
        except KeyError as exc:
            yield "observables", str(exc.args[0])
    try:
        initial_state(s)
    except KeyError as exc:
        yield "initial.state", str(exc.args[0])
    except ValueError as exc:
        yield "initial.weights", str(exc)


def render(s: Scenario) -> str:
    """Canonical document for ``s``; ``parse_scenario(render(s)) == s``."""
    p = s.params
    out = [f"scheme = {s.scheme}"]
    if p.override_constraints:
        out.append("override_constraints = true")
    keys = S1_PARAMS if s.family == "scheme1" else S2_PARAMS
    for k in keys:
        out.append(f"params.{k} = {_fmt(getattr(p, k))}")
    if s.family == "scheme1" and p.pulse is not None:
        for k in PULSE_KEYS:
            out.append(f"params.pulse.{k} = {_fmt(getattr(p.pulse, k))}")
    out.append(f"initial.kind = {s.initial.kind}")
    if s.initial.state is not None:
        out.append(f"initial.state = {s.initial.state}")
    if s.initial.weights:
        out.append("initial.weights = " + ", ".join(f"{w}:{_fmt(float(x))}" for w, x in s.initial.weights))
    out.append(f"run.t_end = {_fmt(s.t_end)}")
    out.append(f"run.dt = {_fmt(s.dt)}")
    out.append(f"run.sample_stride = {s.sample_stride}")
    if s.observables:
        out.append("observables = " + ", ".join(s.observables))
    out.append(f"output = {_fmt(s.output)}")
    out.append(f"units = {s.units}")
    out.append(f"options.literal_prefactor = {_fmt(s.literal_prefactor)}")
    out.append(f"options.cancel_light_shifts = {_fmt(s.cancel_light_shifts)}")
    return "\n".join(out) + "\n"


def load_scenario(path: str | Path) -> Scenario:
    return parse_scenario(Path(path).read_text(encoding="utf-8"))


# --------------------------------------------------------------------------
# model assembly
# --------------------------------------------------------------------------


def _level_scheme(s: Scenario):
    if s.scheme == "scheme1_full":
        return GER
    if s.family == "scheme1":
        return GR
    return QUBIT_RP


def _n_atoms(s: Scenario) -> int:
    return s.params.n_atoms if s.family == "scheme1" else 3


def _named_states(s: Scenario) -> dict[str, np.ndarray]:
    n = _n_atoms(s)
    if s.family == "scheme2":
        return scheme2.collective_basis_s2()
    target = _level_scheme(s)
    return {k: lift_state(v, n, GR, target) for k, v in scheme1.collective_states(n).items()}


def named_state(s: Scenario, name: str) -> np.ndarray:
    """Collective state by name, or a product state spelled as a level word."""
    states = _named_states(s)
    if name in states:
        return states[name]
    ls = _level_scheme(s)
    if len(name) == _n_atoms(s) and all(c in ls.labels for c in name):
        return ls.basis_state(name)
    raise KeyError(f"unknown state {name!r}")


def _observable_vector(s: Scenario, name: str) -> np.ndarray:
    prefix, sep, state = name.partition("_")
    if not sep or prefix not in ("P", "F"):
        raise KeyError(f"observable {name!r} must be P_<state> or F_<state>")
    return named_state(s, state)


def default_observables(s: Scenario) -> tuple[str, ...]:
    if s.family == "scheme1":
        return ("P_GHZ-", "P_GHZ+")
    return ("F_GHZ-", "P_GHZ-", "P_GHZ+", "P_000", "P_111")


def initial_state(s: Scenario) -> np.ndarray:
    n = _n_atoms(s)
    if s.initial.kind == "mixed_default":
        if s.family == "scheme2":
            return scheme2.mixed_initial_state_6()
        return scheme1.mixed_initial_state(n, _level_scheme(s))
    if s.initial.kind == "pure":
        v = named_state(s, s.initial.state)
        return np.outer(v, v.conj())
    dim = _level_scheme(s).d ** n
    diag = np.zeros(dim)
    for word, w in s.initial.weights:
        if w < 0:
            raise ValueError(f"negative weight for {word}")
        diag += w * np.abs(named_state(s, word)) ** 2
    if diag.sum() <= 0:
        raise ValueError("weights sum to zero")
    return np.diag(diag / diag.sum()).astype(complex)


def build_model(s: Scenario) -> MasterEq | Schedule:
    p = s.params
    if s.scheme == "scheme1_full":
        return scheme1.build_full_3atom(p)
    if s.scheme == "scheme1_effective":
        return scheme1.build_effective(p, literal_prefactor=s.literal_prefactor)
    if s.scheme == "scheme1_collective":
        return scheme1.build_collective_model(p)
    if s.scheme == "scheme2_full":
        return scheme2.build_switching_schedule(p, "full", cancel_light_shifts=s.cancel_light_shifts)
    return scheme2.build_switching_schedule(p, "effective")


def time_scale(s: Scenario) -> float:
    """Factor converting reference-unit times to the reported time axis."""
    if s.units == "reference":
        return 1.0
    # t [us] = t_ref / (2 pi f_ref[MHz])
    return 1.0 / (2 * math.pi * REFERENCE_MHZ[s.family])


def run_scenario(s: Scenario) -> TimeSeries:
    model = build_model(s)
    names = s.observables or default_observables(s)
    vectors = {}
    for name in names:
        vectors["P_" + name.partition("_")[2]] = _observable_vector(s, name)
    t_end = s.t_end if s.t_end is not None else s.params.T_total
    ts = integrate(
        model,
        initial_state(s),
        t_end=t_end,
        dt=s.dt,
        observables=list(vectors.items()),
        sample_stride=s.sample_stride,
    )
    values = {}
    for name in names:
        pop = ts["P_" + name.partition("_")[2]]
        values[name] = np.sqrt(np.clip(pop, 0.0, None)) if name.startswith("F_") else pop
    return TimeSeries(ts.times * time_scale(s), values, ts.final_state, ts.diagnostics)


# --------------------------------------------------------------------------
# CSV
# --------------------------------------------------------------------------


def format_csv(ts: TimeSeries) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    labels = list(ts.labels)
    w.writerow(["t", *labels])
    for i, t in enumerate(ts.times):
        w.writerow([f"{t:.17g}", *(f"{ts.values[k][i]:.17g}" for k in labels)])
    return buf.getvalue()


def write_csv(path: str | Path, ts: TimeSeries) -> None:
    Path(path).write_bytes(format_csv(ts).encode("utf-8"))


def read_csv(path: str | Path) -> TimeSeries:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][:1] != ["t"]:
        raise ValueError(f"{path}: header must start with 't'")
    labels = rows[0][1:]
    try:
        data = np.array([[float(x) for x in r] for r in rows[1:]], dtype=float).reshape(-1, len(labels) + 1)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None
    return TimeSeries(data[:, 0], {k: data[:, i + 1] for i, k in enumerate(labels)})


# --------------------------------------------------------------------------
# comparison
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Deviation:
    label: str
    max_abs: float
    at_time: float


def compare(a: TimeSeries, b: TimeSeries, labels=None) -> dict[str, Deviation]:
    """Max absolute deviation per shared observable, on ``a``'s samples inside the overlap.

    ``b`` is linearly interpolated when the sample times differ.
    """
    lo = max(a.times[0], b.times[0])
    hi = min(a.times[-1], b.times[-1])
    if hi < lo:
        raise ValueError(f"time ranges [{a.times[0]}, {a.times[-1]}] and [{b.times[0]}, {b.times[-1]}] are disjoint")
    if labels is None:
        labels = [k for k in a.labels if k in b.values]
    if not labels:
        raise ValueError("no observables in common")
    sel = (a.times >= lo - 1e-12) & (a.times <= hi + 1e-12)
    t = a.times[sel]
    same = a.times.shape == b.times.shape and np.array_equal(a.times, b.times)
    out = {}
    for k in labels:
        va = a.values[k][sel]
        vb = b.values[k][sel] if same else np.interp(t, b.times, b.values[k])
        d = np.abs(va - vb)
        i = int(np.argmax(d))
        out[k] = Deviation(k, float(d[i]), float(t[i]))
    return out


# --------------------------------------------------------------------------
# presets
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Reference:
    """Reference headline value: ``expr`` is an observable label or ``a+b`` sum."""

    expr: str
    value: float
    tol: float


@dataclass(frozen=True)
class Preset:
    name: str
    runs: tuple[tuple[str, Scenario], ...]
    references: tuple[Reference, ...] = ()
    notes: str = ""


FIG2_DT = 1.5e-4


def _fig2(gamma: float = 0.0) -> Scenario:
    return Scenario(
        scheme="scheme1_full",
        params=Scheme1Params(gamma=gamma),
        t_end=200.0,
        dt=FIG2_DT,
        sample_stride=3333,
        observables=("P_GHZ-", "P_GHZ+"),
    )


def _fig3b(pulsed: bool) -> Scenario:
    pulse = GaussianPulse(0.1, 110.0, 90.0) if pulsed else None
    return Scenario(
        scheme="scheme1_full",
        params=Scheme1Params(omega1=0.1, omega3=0.1, pulse=pulse),
        t_end=250.0,
        dt=FIG2_DT,
        sample_stride=3333,
        observables=("P_GHZ-",),
    )


def _fig6() -> Scenario:
    return Scenario(
        scheme="scheme2_effective",
        params=Scheme2Params(omega_p=0.0, N=10),
        sample_stride=40,
        observables=("P_000", "P_111", "P_GHZ-"),
    )


def _fig7(model: str, t_end: float | None = None) -> Scenario:
    full = model == "full"
    return Scenario(
        scheme=f"scheme2_{model}",
        params=Scheme2Params(),
        t_end=t_end,
        dt=1 / 3000 if full else None,
        sample_stride=1500 if full else (4 if t_end else 40),
        observables=("F_GHZ-", "P_GHZ-", "P_GHZ+"),
    )


def _fig8() -> Scenario:
    return Scenario(
        scheme="scheme1_effective",
        params=Scheme1Params(omega1=0.02, omega3=0.02, n_atoms=5, gamma_eff_override=0.4),
        t_end=600.0,
        sample_stride=20,
        observables=("P_GHZ-", "P_GHZ+"),
    )


PRESETS: dict[str, Preset] = {
    "fig2": Preset(
        "fig2",
        (("", _fig2()),),
        (Reference("P_GHZ-", 0.9954, 0.005), Reference("P_GHZ+", 0.0030, 0.003)),
    ),
    "fig2_gamma": Preset("fig2_gamma", (("", _fig2(0.01)),), (Reference("P_GHZ-", 0.7579, 0.01),)),
    "fig3b": Preset(
        "fig3b",
        (("constant", _fig3b(False)), ("pulsed", _fig3b(True))),
        (Reference("P_GHZ-_constant", 0.9946, 0.005), Reference("P_GHZ-_pulsed", 0.9981, 0.005)),
    ),
    "fig6": Preset(
        "fig6",
        (("", _fig6()),),
        (Reference("P_000+P_111", 0.9958, 0.01),),
    ),
    "fig7": Preset("fig7", (("", _fig7("effective")),), (Reference("F_GHZ-", 0.9757, 0.01),)),
    "fig7_full_truncated": Preset(
        "fig7_full_truncated",
        (("full", _fig7("full", 500.0)), ("effective", _fig7("effective", 500.0))),
        notes="long horizon only on the effective model; compare the two columns",
    ),
    "fig8": Preset(
        "fig8",
        (("", _fig8()),),
        (Reference("P_GHZ-", 0.9927, 0.01), Reference("P_GHZ+", 0.0053, 0.005)),
    ),
}


def _merge(parts: list[tuple[str, TimeSeries]]) -> TimeSeries:
    if len(parts) == 1:
        return parts[0][1]
    base = parts[0][1].times
    values = {}
    for suffix, ts in parts:
        for k, v in ts.values.items():
            if ts.times.shape == base.shape and np.allclose(ts.times, base, rtol=0, atol=1e-9):
                values[f"{k}_{suffix}"] = v
            else:
                values[f"{k}_{suffix}"] = np.interp(base, ts.times, v)
    diags = {f"{s}.{k}": v for s, ts in parts for k, v in ts.diagnostics.items()}
    return TimeSeries(base, values, None, diags)


def run_preset(name: str, out_dir: str | Path | None = None) -> tuple[TimeSeries, Path | None]:
    if name not in PRESETS:
        raise ScenarioError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    preset = PRESETS[name]
    parts = [(suffix, run_scenario(s)) for suffix, s in preset.runs]
    ts = _merge(parts)
    path = None
    if out_dir is not None:
        path = Path(out_dir) / f"{name}.csv"
        write_csv(path, ts)
    return ts, path


def headline(name: str, ts: TimeSeries) -> list[tuple[str, float, float, float]]:
    """``(expression, value, reference, tolerance)`` for each reference number of a preset."""
    rows = []
    for ref in PRESETS[name].references:
        rows.append((ref.expr, _evaluate(ref.expr, ts), ref.value, ref.tol))
    if name == "fig7_full_truncated":
        dev = compare(
            TimeSeries(ts.times, {"F": ts["F_GHZ-_full"]}),
            TimeSeries(ts.times, {"F": ts["F_GHZ-_effective"]}),
        )["F"]
        rows.append(("max|F_full-F_eff|", dev.max_abs, 0.0, 0.02))
    return rows


def _evaluate(expr: str, ts: TimeSeries) -> float:
    # labels may themselves contain '+' (GHZ+), so split only on '+' followed by a label start
    total = 0.0
    for term in _split_sum(expr, ts.labels):
        total += ts.final(term)
    return float(total)


def _split_sum(expr: str, labels) -> list[str]:
    if expr in labels:
        return [expr]
    for i, ch in enumerate(expr):
        if ch == "+" and expr[:i] in labels:
            return [expr[:i], *_split_sum(expr[i + 1 :], labels)]
    raise KeyError(f"cannot resolve {expr!r} against {list(labels)}")


__all__ = [
    "Deviation",
    "InitialState",
    "PRESETS",
    "Preset",
    "Reference",
    "Scenario",
    "ScenarioError",
    "build_model",
    "compare",
    "format_csv",
    "headline",
    "initial_state",
    "load_scenario",
    "named_state",
    "parse_scenario",
    "read_csv",
    "render",
    "run_preset",
    "run_scenario",
    "write_csv",
]
