"""Plain-text run configuration: INI-style sections, strict schema.

`key = value` lines under `[section]` headers, `#` comments.  Unknown
sections or keys are errors (no silent typos), and every module
invariant is re-validated at parse time so mistakes carry a file/line
context.  The canonical digest (SHA-256 over sorted section.key=value
lines) is stable under reordering and is printed by the CLI for
provenance.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .errors import ParseError, UnknownKey, ValidationError
from .grid import GridSpec
from .integrator import SolverConfig
from .perturbation import PerturbSpec
from .poisson import PoissonConfig
from .shock import EndStates, Frame, solve_rankine_hugoniot

__all__ = ["RunConfig", "parse_config", "parse_config_text", "canonical_digest"]


def _parse_bool(s: str) -> bool:
    low = s.strip().lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _parse_modes(s: str) -> tuple:
    """Whitespace-separated k2:k3:weight triplets."""
    out = []
    for tok in s.split():
        parts = tok.split(":")
        if len(parts) != 3:
            raise ValueError(f"mode {tok!r} is not k2:k3:weight")
        out.append((int(parts[0]), int(parts[1]), float(parts[2])))
    if not out:
        raise ValueError("empty mode list")
    return tuple(out)


def _parse_targets(s: str) -> tuple:
    out = tuple(s.split())
    if not out:
        raise ValueError("empty target list")
    return out


def _parse_frame(s: str) -> str:
    return Frame(s.strip()).value


# section -> key -> (parser, default); None default means required
_SCHEMA = {
    "domain": {
        "L": (float, 50.0),
        "N1": (int, 1024),
        "N2": (int, 1),
        "N3": (int, 1),
    },
    "shock": {
        "rho_minus": (float, None),
        "rho_plus": (float, None),
        "T": (float, 1.0),
        "frame": (_parse_frame, Frame.SHOCK_STATIONARY.value),
    },
    "profile": {
        "tol": (float, 3e-11),
        "max_iter": (int, 25),
    },
    "sim": {
        "t_final": (float, 10.0),
        "dt_max": (float, 0.1),
        "cfl_adv": (float, 0.5),
        "cfl_visc": (float, 0.25),
        "output_every": (float, 1.0),
        "eps4": (float, 0.01),
        "poisson_tol": (float, 1e-10),
        "poisson_max_newton": (int, 25),
        "poisson_precond_refresh": (int, 50),
    },
    "perturb": {
        "amplitude": (float, 1e-2),
        "x1_width": (float, 5.0),
        "modes": (_parse_modes, ((0, 0, 1.0),)),
        "seed": (int, 0),
        "targets": (_parse_targets, ("z", "r1")),
    },
    "io": {
        "out_dir": (str, "runs/out"),
        "snapshots": (_parse_bool, False),
    },
}


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration with builders for the module objects."""

    values: dict = field(repr=False)

    def __getitem__(self, key: str):
        return self.values[key]

    def grid(self) -> GridSpec:
        v = self.values
        return GridSpec(
            L=v["domain.L"], N1=v["domain.N1"], N2=v["domain.N2"], N3=v["domain.N3"]
        )

    def endstates(self, frame: str | None = None) -> EndStates:
        v = self.values
        return solve_rankine_hugoniot(
            v["shock.rho_minus"],
            v["shock.rho_plus"],
            v["shock.T"],
            Frame(frame if frame is not None else v["shock.frame"]),
        )

    def poisson_config(self) -> PoissonConfig:
        v = self.values
        return PoissonConfig(
            tol=v["sim.poisson_tol"],
            max_newton=v["sim.poisson_max_newton"],
            precond_refresh=v["sim.poisson_precond_refresh"],
        )

    def solver_config(self) -> SolverConfig:
        v = self.values
        return SolverConfig(
            t_final=v["sim.t_final"],
            dt_max=v["sim.dt_max"],
            cfl_adv=v["sim.cfl_adv"],
            cfl_visc=v["sim.cfl_visc"],
            output_every=v["sim.output_every"],
            eps4=v["sim.eps4"],
            poisson=self.poisson_config(),
        )

    def perturb_spec(self) -> PerturbSpec:
        v = self.values
        return PerturbSpec(
            amplitude=v["perturb.amplitude"],
            x1_width=v["perturb.x1_width"],
            modes=v["perturb.modes"],
            seed=v["perturb.seed"],
            targets=v["perturb.targets"],
        )

    @property
    def out_dir(self) -> str:
        return self.values["io.out_dir"]

    @property
    def snapshots(self) -> bool:
        return self.values["io.snapshots"]


def parse_config_text(text: str, name: str = "<config>") -> RunConfig:
    raw: dict[str, str] = {}
    lines_of: dict[str, int] = {}
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                raise ParseError(lineno, f"malformed section header {stripped!r}")
            section = stripped[1:-1].strip()
            if section not in _SCHEMA:
                raise UnknownKey(section, lineno)
            continue
        if "=" not in stripped:
            raise ParseError(lineno, f"expected key = value, got {stripped!r}")
        if section is None:
            raise ParseError(lineno, "key outside any [section]")
        key, _, val = stripped.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in _SCHEMA[section]:
            raise UnknownKey(f"{section}.{key}", lineno)
        full = f"{section}.{key}"
        if full in raw:
            raise ParseError(lineno, f"duplicate key {full}")
        raw[full] = val
        lines_of[full] = lineno

    values: dict = {}
    for section, keys in _SCHEMA.items():
        for key, (parser, default) in keys.items():
            full = f"{section}.{key}"
            if full in raw:
                try:
                    values[full] = parser(raw[full])
                except (ValueError, TypeError) as exc:
                    raise ParseError(lines_of[full], f"{full}: {exc}") from exc
            else:
                if default is None:
                    raise ValidationError(full, "required key missing")
                values[full] = default

    cfg = RunConfig(values=values)
    # re-validate module invariants with key context
    try:
        cfg.grid()
    except Exception as exc:
        raise ValidationError("domain", str(exc)) from exc
    try:
        cfg.endstates()
    except Exception as exc:
        raise ValidationError("shock", str(exc)) from exc
    try:
        cfg.solver_config()
    except Exception as exc:
        raise ValidationError("sim", str(exc)) from exc
    try:
        spec = cfg.perturb_spec()
        spec.validate_modes(cfg.grid())
    except Exception as exc:
        raise ValidationError("perturb", str(exc)) from exc
    if cfg.values["profile.tol"] <= 0:
        raise ValidationError("profile.tol", "must be positive")
    if cfg.values["profile.max_iter"] < 1:
        raise ValidationError("profile.max_iter", "must be >= 1")
    return cfg


def parse_config(path: str) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read(), name=path)


def _canon(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, int):
        return str(v)
    if isinstance(v, str):
        return v
    if isinstance(v, tuple):
        return "(" + ",".join(_canon(x) for x in v) + ")"
    raise TypeError(f"cannot canonicalize {type(v)}")


def canonical_digest(cfg: RunConfig) -> str:
    """SHA-256 of the canonicalized config, stable under key reordering."""
    lines = sorted(f"{k}={_canon(v)}" for k, v in cfg.values.items())
    return hashlib.sha256("\n".join(lines).encode()).hexdigest()
