"""Scenario records and the key-value configuration format.

Config files are INI-style with one section per concern:

    [scenario]  name, model
    [params]    rate constants (extended-only keys required only for the
                extended model)
    [grid]      length, mx
    [time]      dt, t_end, stride, stepper, steady_stop, allow_unstable_dt
    [initial]   homogeneous values plus an optional cosine perturbation
    [outputs]   which artifacts a run writes

Parsing is strict: unknown sections or keys are rejected, missing required
keys name the key, and every parameter invariant is enforced at load time.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, replace
from pathlib import Path

from ..errors import ConfigError, ParameterError, SchrkitError
from ..kinetics import Model, ModelParams
from ..rdsolver import Grid1D, SimConfig
from ..stability import FUNCTIONALS

OUTPUT_KINDS = ("trajectory", "diagnostics", "stability", "lyapunov")
LYAPUNOV_CHOICES = ("none", "auto") + FUNCTIONALS


@dataclass(frozen=True)
class Scenario:
    """A named simulation plus the artifacts it should produce."""

    name: str
    config: SimConfig
    outputs: tuple[str, ...] = ("trajectory", "diagnostics")
    lyapunov: str = "none"
    out_dir: Path | None = None

    def __post_init__(self):
        if not self.name:
            raise ConfigError("scenario name must be nonempty")
        if not self.outputs:
            raise ConfigError("scenario must request at least one output")
        for o in self.outputs:
            if o not in OUTPUT_KINDS:
                raise ConfigError(f"unknown output kind {o!r}")
        if self.lyapunov not in LYAPUNOV_CHOICES:
            raise ConfigError(f"unknown lyapunov choice {self.lyapunov!r}")

    def with_out_dir(self, out_dir) -> "Scenario":
        return replace(self, out_dir=Path(out_dir))


_PARAM_KEYS = {
    "lambda": "lambda_recruit", "beta": "beta",
    "eta1": "eta1", "eta2": "eta2", "eta3": "eta3", "eta4": "eta4",
    "eta5": "eta5", "eta6": "eta6",
    "sigma": "sigma",
    "gamma1": "gamma1", "gamma2": "gamma2", "gamma3": "gamma3", "gamma4": "gamma4",
    "mu1": "mu1", "mu2": "mu2", "kappa1": "kappa1", "kappa2": "kappa2",
    "d": "d",
}
_REQUIRED_BASIC = ("lambda", "beta", "eta1", "eta2", "eta3", "eta4",
                   "sigma", "gamma1", "gamma2", "d")
_REQUIRED_EXTENDED = _REQUIRED_BASIC + (
    "eta5", "eta6", "gamma3", "gamma4", "mu1", "mu2", "kappa1", "kappa2")

_KNOWN_KEYS = {
    "scenario": ("name", "model"),
    "params": tuple(_PARAM_KEYS),
    "grid": ("length", "mx"),
    "time": ("dt", "t_end", "stride", "stepper", "steady_stop",
             "allow_unstable_dt"),
    "initial": ("s", "c", "h", "r", "uc", "uh",
                "perturb_amplitude", "perturb_mode"),
    "outputs": ("trajectory", "diagnostics", "stability", "lyapunov"),
}

_DEFAULT_INITIAL = {"s": 30.0, "c": 10.0, "h": 5.0, "r": 0.0,
                    "uc": 3.0, "uh": 3.0}


class _Section:
    """One config section with typed, tracked key access."""

    def __init__(self, name: str, items: dict[str, str]):
        self.name = name
        self.items = items

    def _raw(self, key: str, default):
        if key in self.items:
            return self.items[key]
        if default is _REQUIRED:
            raise ConfigError(f"missing key: {self.name}.{key}")
        return default

    def get_str(self, key: str, default=None) -> str:
        v = self._raw(key, default)
        return v if isinstance(v, str) else v

    def get_float(self, key: str, default=None) -> float:
        v = self._raw(key, default)
        if isinstance(v, str):
            try:
                return float(v)
            except ValueError:
                raise ConfigError(
                    f"{self.name}.{key} must be a number, got {v!r}") from None
        return v

    def get_int(self, key: str, default=None) -> int:
        v = self._raw(key, default)
        if isinstance(v, str):
            try:
                return int(v)
            except ValueError:
                raise ConfigError(
                    f"{self.name}.{key} must be an integer, got {v!r}") from None
        return v

    def get_bool(self, key: str, default=None) -> bool:
        v = self._raw(key, default)
        if isinstance(v, str):
            low = v.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ConfigError(f"{self.name}.{key} must be a boolean, got {v!r}")
        return v


_REQUIRED = object()


def load_scenario(path) -> Scenario:
    """Parse and fully validate a scenario file."""
    path = Path(path)
    parser = configparser.ConfigParser(interpolation=None, strict=True)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc

    sections: dict[str, _Section] = {}
    for sec in parser.sections():
        if sec not in _KNOWN_KEYS:
            raise ConfigError(f"unknown section [{sec}]")
        for key in parser[sec]:
            if key not in _KNOWN_KEYS[sec]:
                raise ConfigError(f"unknown key: {sec}.{key}")
        sections[sec] = _Section(sec, dict(parser[sec]))
    for required_sec in ("scenario", "params"):
        if required_sec not in sections:
            raise ConfigError(f"missing section [{required_sec}]")
    for sec in _KNOWN_KEYS:
        sections.setdefault(sec, _Section(sec, {}))

    scen = sections["scenario"]
    name = scen.get_str("name", _REQUIRED)
    model_name = scen.get_str("model", _REQUIRED).strip().lower()
    try:
        model = Model(model_name)
    except ValueError:
        raise ConfigError(
            f"scenario.model must be 'basic' or 'extended', got {model_name!r}"
        ) from None

    par = sections["params"]
    required = _REQUIRED_BASIC if model is Model.BASIC else _REQUIRED_EXTENDED
    for key in required:
        if key not in par.items:
            raise ConfigError(f"missing key: params.{key}")
    kwargs = {}
    for key, field in _PARAM_KEYS.items():
        if key in par.items:
            kwargs[field] = par.get_float(key)
    try:
        params = ModelParams(**kwargs)
        if model is Model.BASIC:
            params.require_basic_analysis()
        else:
            params.require_extended_analysis()
    except ParameterError as exc:
        raise ConfigError(str(exc)) from exc

    gr = sections["grid"]
    grid = Grid1D(length=gr.get_float("length", 2.0), mx=gr.get_int("mx", 40))

    tm = sections["time"]
    stepper = tm.get_str("stepper", "explicit").strip().lower()

    ini = sections["initial"]
    labels = ("s", "c", "h", "r") if model is Model.BASIC \
        else ("s", "c", "uc", "h", "uh", "r")
    initial = tuple(ini.get_float(k, _DEFAULT_INITIAL[k]) for k in labels)

    try:
        config = SimConfig(
            params=params,
            model=model,
            grid=grid,
            initial=initial,
            perturb_amplitude=ini.get_float("perturb_amplitude", 0.0),
            perturb_mode=ini.get_int("perturb_mode", 1),
            dt=tm.get_float("dt", 1e-2),
            t_end=tm.get_float("t_end", 500.0),
            stride=tm.get_int("stride", 500),
            stepper=stepper,
            steady_stop=tm.get_bool("steady_stop", False),
            allow_unstable_dt=tm.get_bool("allow_unstable_dt", False),
        )
    except SchrkitError as exc:
        raise ConfigError(str(exc)) from exc

    out = sections["outputs"]
    lyapunov = out.get_str("lyapunov", "none").strip().lower()
    if lyapunov not in LYAPUNOV_CHOICES:
        raise ConfigError(
            f"outputs.lyapunov must be one of {LYAPUNOV_CHOICES}, got {lyapunov!r}")
    outputs = []
    for kind in ("trajectory", "diagnostics"):
        if out.get_bool(kind, True):
            outputs.append(kind)
    if out.get_bool("stability", False):
        outputs.append("stability")
    if lyapunov != "none":
        outputs.append("lyapunov")
    if not outputs:
        raise ConfigError("outputs: at least one artifact must be enabled")

    return Scenario(name=name, config=config, outputs=tuple(outputs),
                    lyapunov=lyapunov)


def write_scenario(s: Scenario, path) -> None:
    """Serialise a scenario to the config format (round-trips through
    load_scenario)."""
    cfg = s.config
    p = cfg.params
    lines = [
        "[scenario]",
        f"name = {s.name}",
        f"model = {cfg.model.value}",
        "",
        "[params]",
        f"lambda = {p.lambda_recruit!r}",
        f"beta = {p.beta!r}",
        f"eta1 = {p.eta1!r}",
        f"eta2 = {p.eta2!r}",
        f"eta3 = {p.eta3!r}",
        f"eta4 = {p.eta4!r}",
    ]
    if cfg.model is Model.EXTENDED:
        lines += [f"eta5 = {p.eta5!r}", f"eta6 = {p.eta6!r}"]
    lines += [
        f"sigma = {p.sigma!r}",
        f"gamma1 = {p.gamma1!r}",
        f"gamma2 = {p.gamma2!r}",
    ]
    if cfg.model is Model.EXTENDED:
        lines += [
            f"gamma3 = {p.gamma3!r}",
            f"gamma4 = {p.gamma4!r}",
            f"mu1 = {p.mu1!r}",
            f"mu2 = {p.mu2!r}",
            f"kappa1 = {p.kappa1!r}",
            f"kappa2 = {p.kappa2!r}",
        ]
    lines += [
        f"d = {p.d!r}",
        "",
        "[grid]",
        f"length = {cfg.grid.length!r}",
        f"mx = {cfg.grid.mx}",
        "",
        "[time]",
        f"dt = {cfg.dt!r}",
        f"t_end = {cfg.t_end!r}",
        f"stride = {cfg.stride}",
        f"stepper = {cfg.stepper}",
        f"steady_stop = {str(cfg.steady_stop).lower()}",
        f"allow_unstable_dt = {str(cfg.allow_unstable_dt).lower()}",
        "",
        "[initial]",
    ]
    labels = ("s", "c", "h", "r") if cfg.model is Model.BASIC \
        else ("s", "c", "uc", "h", "uh", "r")
    for label, value in zip(labels, cfg.initial):
        lines.append(f"{label} = {value!r}")
    lines += [
        f"perturb_amplitude = {cfg.perturb_amplitude!r}",
        f"perturb_mode = {cfg.perturb_mode}",
        "",
        "[outputs]",
        f"trajectory = {str('trajectory' in s.outputs).lower()}",
        f"diagnostics = {str('diagnostics' in s.outputs).lower()}",
        f"stability = {str('stability' in s.outputs).lower()}",
        f"lyapunov = {s.lyapunov}",
        "",
    ]
    Path(path).write_text("\n".join(lines), encoding="utf-8")
