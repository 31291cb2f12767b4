"""Experiment configuration: strict YAML ingestion with line-aware diagnostics."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np
import yaml

from floqbound.fourier_poly import DEFAULT_GRID, HarmonicPoly
from floqbound.propagator import PropagationSettings, canonical_method
from floqbound.rabi import RabiParams


class ConfigError(ValueError):
    def __init__(self, message: str, path: tuple = (), line: int | None = None):
        self.path = path
        self.line = line
        where = ".".join(str(p) for p in path) or "<root>"
        loc = f" (line {line})" if line is not None else ""
        super().__init__(f"config error at {where}{loc}: {message}")


@dataclass(frozen=True)
class RabiSpec:
    g: float = 1.0
    omega: float = 5.0
    omega0: float | None = None

    @property
    def delta(self) -> float:
        return (self.omega if self.omega0 is None else self.omega0) - self.omega

    def params(self, omega: float | None = None) -> RabiParams:
        """Model parameters, optionally at another drive frequency with the same detuning."""
        w = self.omega if omega is None else omega
        return RabiParams(self.g, w, w + self.delta)


@dataclass(frozen=True)
class Harmonic:
    n: int
    matrix: tuple  # rows of complex entries


@dataclass(frozen=True)
class CustomSpec:
    dim: int
    omega: float
    harmonics: tuple[Harmonic, ...]

    def hamiltonian(self) -> HarmonicPoly:
        coeffs: dict[int, np.ndarray] = {}
        for hm in self.harmonics:
            m = np.array(hm.matrix, dtype=complex)
            coeffs[hm.n] = coeffs.get(hm.n, 0) + m
        return HarmonicPoly.from_harmonics(self.dim, coeffs)


@dataclass(frozen=True)
class TimeSpec:
    t_max: float = 100.0
    samples: int = 1000
    values: tuple[float, ...] | None = None

    def grid(self) -> np.ndarray:
        if self.values is not None:
            return np.array(self.values, dtype=float)
        return np.linspace(0.0, self.t_max, self.samples)


@dataclass(frozen=True)
class StrobeSpec:
    periods: int = 20


@dataclass(frozen=True)
class SweepSpec:
    omega_min: float = 1.0
    omega_max: float = 100.0
    points: int = 25
    fixed_t: float = 100.0

    def grid(self) -> np.ndarray:
        return np.geomspace(self.omega_min, self.omega_max, self.points)


@dataclass(frozen=True)
class IntegratorSpec:
    step: float | None = None
    method: str = "magnus-cf4"
    richardson: bool = True

    def settings(self, richardson: bool | None = None) -> PropagationSettings:
        r = self.richardson if richardson is None else richardson
        return PropagationSettings(self.step, self.method, r)


@dataclass(frozen=True)
class OutputSpec:
    path: str | None = None
    format: str = "csv"


@dataclass(frozen=True)
class ExperimentConfig:
    model: str = "rabi"
    rabi: RabiSpec | None = field(default_factory=RabiSpec)
    custom: CustomSpec | None = None
    order: int = 2
    times: TimeSpec = field(default_factory=TimeSpec)
    strobe: StrobeSpec = field(default_factory=StrobeSpec)
    sweep: SweepSpec = field(default_factory=SweepSpec)
    integrator: IntegratorSpec = field(default_factory=IntegratorSpec)
    output: OutputSpec = field(default_factory=OutputSpec)
    grid_points: int = DEFAULT_GRID
    workers: int | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        if self.custom is not None:
            d["custom"]["harmonics"] = [
                {"n": h.n, "matrix": [[[z.real, z.imag] for z in row] for row in h.matrix]}
                for h in self.custom.harmonics
            ]
        else:
            del d["custom"]
        if self.rabi is None:
            del d["rabi"]
        elif self.rabi.omega0 is None:
            del d["rabi"]["omega0"]
        t = d["times"]
        if t["values"] is None:
            del t["values"]
        else:
            d["times"] = list(t["values"])
        return d


def serialize_config(cfg: ExperimentConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=False)


# parsing ----------------------------------------------------------------------


def _line_index(node, path=(), out=None) -> dict:
    out = {} if out is None else out
    out.setdefault(path, node.start_mark.line + 1)
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            key = k.value
            out[path + (key,)] = k.start_mark.line + 1
            _line_index(v, path + (key,), out)
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            _line_index(v, path + (i,), out)
    return out


class _Reader:
    def __init__(self, lines: dict):
        self.lines = lines

    def fail(self, message, path):
        line = None
        p = tuple(path)
        while line is None:
            line = self.lines.get(p)
            if not p:
                break
            p = p[:-1]
        raise ConfigError(message, tuple(path), line)

    def mapping(self, value, path, allowed):
        if value is None:
            return {}
        if not isinstance(value, dict):
            self.fail(f"expected a mapping, got {type(value).__name__}", path)
        for key in value:
            if key not in allowed:
                self.fail(f"unknown key {key!r}; allowed: {sorted(allowed)}", path + (key,))
        return value

    def number(self, value, path, positive=False, nonneg=False):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.fail(f"expected a number, got {value!r}", path)
        value = float(value)
        if not math.isfinite(value):
            self.fail("expected a finite number", path)
        if positive and value <= 0:
            self.fail(f"expected a positive number, got {value}", path)
        if nonneg and value < 0:
            self.fail(f"expected a non-negative number, got {value}", path)
        return value

    def integer(self, value, path, minimum=None):
        if isinstance(value, bool) or not isinstance(value, int):
            self.fail(f"expected an integer, got {value!r}", path)
        if minimum is not None and value < minimum:
            self.fail(f"expected an integer >= {minimum}, got {value}", path)
        return value

    def choice(self, value, path, options):
        if value not in options:
            self.fail(f"expected one of {list(options)}, got {value!r}", path)
        return value

    def boolean(self, value, path):
        if not isinstance(value, bool):
            self.fail(f"expected true/false, got {value!r}", path)
        return value


def _names(cls) -> set:
    return {f.name for f in fields(cls)}


def _parse_rabi(r: _Reader, value, path) -> RabiSpec:
    m = r.mapping(value, path, {"g", "omega", "omega0", "delta"})
    g = r.number(m.get("g", 1.0), path + ("g",), positive=True)
    omega = r.number(m.get("omega", 5.0), path + ("omega",), positive=True)
    if "omega0" in m and "delta" in m:
        r.fail("give either omega0 or delta, not both", path + ("delta",))
    omega0 = None
    if "omega0" in m:
        omega0 = r.number(m["omega0"], path + ("omega0",), positive=True)
    elif "delta" in m:
        omega0 = omega + r.number(m["delta"], path + ("delta",))
        if omega0 <= 0:
            r.fail("omega + delta must be positive", path + ("delta",))
    return RabiSpec(g, omega, omega0)


def _parse_entry(r: _Reader, z, path) -> complex:
    if isinstance(z, (list, tuple)):
        if len(z) != 2:
            r.fail("complex entries are [re, im] pairs", path)
        return complex(r.number(z[0], path + (0,)), r.number(z[1], path + (1,)))
    return complex(r.number(z, path))


def _parse_custom(r: _Reader, value, path) -> CustomSpec:
    m = r.mapping(value, path, {"dim", "omega", "harmonics"})
    for key in ("dim", "omega", "harmonics"):
        if key not in m:
            r.fail(f"missing required key {key!r}", path)
    dim = r.integer(m["dim"], path + ("dim",), minimum=1)
    omega = r.number(m["omega"], path + ("omega",), positive=True)
    raw = m["harmonics"]
    if not isinstance(raw, list) or not raw:
        r.fail("expected a non-empty list of harmonics", path + ("harmonics",))
    harmonics = []
    for i, item in enumerate(raw):
        hp = path + ("harmonics", i)
        hm = r.mapping(item, hp, {"n", "matrix"})
        if "n" not in hm or "matrix" not in hm:
            r.fail("each harmonic needs 'n' and 'matrix'", hp)
        n = r.integer(hm["n"], hp + ("n",))
        rows = hm["matrix"]
        if not isinstance(rows, list) or len(rows) != dim:
            r.fail(f"expected {dim} rows", hp + ("matrix",))
        mat = []
        for a, row in enumerate(rows):
            if not isinstance(row, list) or len(row) != dim:
                r.fail(f"expected {dim} entries", hp + ("matrix", a))
            mat.append(tuple(_parse_entry(r, z, hp + ("matrix", a, b)) for b, z in enumerate(row)))
        harmonics.append(Harmonic(n, tuple(mat)))
    spec = CustomSpec(dim, omega, tuple(harmonics))
    if not spec.hamiltonian().is_hermitian_function(1e-12):
        r.fail("harmonics do not define a Hermitian operator (need A_{-n} = A_n^dagger)", path + ("harmonics",))
    return spec


def parse_config(text: str) -> ExperimentConfig:
    """Parse a YAML experiment document; unknown keys and bad types are rejected."""
    try:
        node = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"malformed document: {exc}", (), mark.line + 1 if mark else None) from exc
    r = _Reader(_line_index(node) if node is not None else {})
    top = r.mapping(data, (), _names(ExperimentConfig))

    model = r.choice(top.get("model", "custom" if "custom" in top else "rabi"), ("model",), ("rabi", "custom"))
    present = [b for b in ("rabi", "custom") if b in top]
    if len(present) > 1:
        r.fail("exactly one model branch may be given", (present[1],))
    if present and present[0] != model:
        r.fail(f"model is {model!r} but a {present[0]!r} section was given", (present[0],))
    rabi = _parse_rabi(r, top.get("rabi"), ("rabi",)) if model == "rabi" else None
    if model == "custom":
        if "custom" not in top:
            r.fail("model 'custom' requires a 'custom' section", ("model",))
        custom = _parse_custom(r, top["custom"], ("custom",))
    else:
        custom = None

    order = r.integer(top.get("order", 2), ("order",), minimum=0)

    tv = top.get("times")
    if isinstance(tv, list):
        vals = tuple(r.number(x, ("times", i), nonneg=True) for i, x in enumerate(tv))
        if len(vals) < 2:
            r.fail("at least 2 times are required", ("times",))
        if any(b < a for a, b in zip(vals, vals[1:])):
            r.fail("times must be sorted", ("times",))
        times = TimeSpec(max(vals), len(vals), vals)
    else:
        tm = r.mapping(tv, ("times",), {"t_max", "samples"})
        times = TimeSpec(
            r.number(tm.get("t_max", 100.0), ("times", "t_max"), positive=True),
            r.integer(tm.get("samples", 1000), ("times", "samples"), minimum=2),
        )

    sm = r.mapping(top.get("strobe"), ("strobe",), _names(StrobeSpec))
    strobe = StrobeSpec(r.integer(sm.get("periods", 20), ("strobe", "periods"), minimum=1))

    wm = r.mapping(top.get("sweep"), ("sweep",), _names(SweepSpec))
    sweep = SweepSpec(
        r.number(wm.get("omega_min", 1.0), ("sweep", "omega_min"), positive=True),
        r.number(wm.get("omega_max", 100.0), ("sweep", "omega_max"), positive=True),
        r.integer(wm.get("points", 25), ("sweep", "points"), minimum=1),
        r.number(wm.get("fixed_t", 100.0), ("sweep", "fixed_t"), nonneg=True),
    )
    if sweep.omega_max < sweep.omega_min:
        r.fail("omega_max must be >= omega_min", ("sweep", "omega_max"))

    im = r.mapping(top.get("integrator"), ("integrator",), _names(IntegratorSpec))
    step = im.get("step")
    if step is not None:
        step = r.number(step, ("integrator", "step"), positive=True)
    method = im.get("method", "magnus-cf4")
    try:
        method = canonical_method(method)
    except ValueError as exc:
        r.fail(str(exc), ("integrator", "method"))
    integrator = IntegratorSpec(step, method, r.boolean(im.get("richardson", True), ("integrator", "richardson")))

    om = r.mapping(top.get("output"), ("output",), _names(OutputSpec))
    path = om.get("path")
    if path is not None and not isinstance(path, str):
        r.fail("expected a string path", ("output", "path"))
    output = OutputSpec(path, r.choice(om.get("format", "csv"), ("output", "format"), ("csv", "json")))

    grid = r.integer(top.get("grid_points", DEFAULT_GRID), ("grid_points",), minimum=16)
    workers = top.get("workers")
    if workers is not None:
        workers = r.integer(workers, ("workers",), minimum=1)

    return ExperimentConfig(model, rabi, custom, order, times, strobe, sweep, integrator, output, grid, workers)


def load_config(path: str) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def with_overrides(cfg: ExperimentConfig, **kw) -> ExperimentConfig:
    """Apply CLI-style overrides; ``None`` values are ignored."""
    kw = {k: v for k, v in kw.items() if v is not None}
    if not kw:
        return cfg
    rabi_keys = {k: kw.pop(k) for k in ("g", "omega", "omega0") if k in kw}
    if rabi_keys:
        if cfg.model != "rabi":
            raise ConfigError("--g/--omega/--omega0 apply to the rabi model only", ("model",))
        for k, v in rabi_keys.items():
            if not (math.isfinite(v) and v > 0):
                raise ConfigError(f"expected a positive number, got {v}", ("rabi", k))
        cfg = replace(cfg, rabi=replace(cfg.rabi, **rabi_keys))
    if "order" in kw:
        if kw["order"] < 0:
            raise ConfigError("expected an integer >= 0", ("order",))
        cfg = replace(cfg, order=kw.pop("order"))
    tk = {k: kw.pop(k) for k in ("t_max", "samples") if k in kw}
    if tk:
        if tk.get("samples", 2) < 2 or tk.get("t_max", 1.0) <= 0:
            raise ConfigError("need t_max > 0 and samples >= 2", ("times",))
        cfg = replace(cfg, times=replace(cfg.times, values=None, **tk))
    ik = {k: kw.pop(k) for k in ("step", "method") if k in kw}
    if ik:
        if "method" in ik:
            try:
                ik["method"] = canonical_method(ik["method"])
            except ValueError as exc:
                raise ConfigError(str(exc), ("integrator", "method")) from exc
        if ik.get("step", 1.0) <= 0:
            raise ConfigError("step must be positive", ("integrator", "step"))
        cfg = replace(cfg, integrator=replace(cfg.integrator, **ik))
    ok = {k: kw.pop(k) for k in ("path", "format") if k in kw}
    if ok:
        cfg = replace(cfg, output=replace(cfg.output, **ok))
    if "grid_points" in kw:
        if kw["grid_points"] < 16:
            raise ConfigError("expected an integer >= 16", ("grid_points",))
        cfg = replace(cfg, grid_points=kw.pop("grid_points"))
    if kw:
        raise ConfigError(f"unsupported overrides {sorted(kw)}")
    return cfg
