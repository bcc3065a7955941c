"""Flat ``key = value`` experiment configuration.

One assignment per line, ``#`` starts a comment, lists are comma separated.
Unknown keys are rejected. See ``KEYS`` for the accepted keys and README.md
for their meaning.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple

from ..cnfd import SolverParams
from ..linsolve import PRECONDITIONERS
from ..nonlinearity import CubicQuinticCoeffs

EXPERIMENTS = ("evolve", "groundstate", "converge", "conserve", "stabmap", "ssfm-ref", "timing")
INITIAL_CONDITIONS = ("soliton", "gaussian-vortex", "file", "random")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str = "evolve"
    domain: Tuple[float, float, float, float] = (-10.0, 10.0, -10.0, 10.0)
    h: List[float] = field(default_factory=lambda: [0.25])
    tau: List[float] = field(default_factory=lambda: [2.0**-5])
    t_final: float = 0.5
    sample_times: List[float] = field(default_factory=list)

    lambda_: float = 1.0
    nu: float = 0.01
    epsilon: float = 0.01
    fp_tol: float = 1e-8
    fp_maxiter: int = 100
    lin_tol: float = 1e-12
    lin_maxiter: Optional[int] = None
    lin_precond: str = "jacobi"

    ic: str = "gaussian-vortex"
    ic_file: Optional[str] = None
    random_amplitude: float = 0.1
    A0: float = 1.0
    x0: float = 0.0
    y0: float = 0.0
    d1: float = 0.0
    d2: float = 0.0
    alpha0: float = 0.0

    gs_power: float = 60.0
    gs_half_width: Optional[float] = None
    gs_h: Optional[float] = None
    gs_tol: float = 1e-9
    gs_maxiter: int = 20000
    gs_shift: Optional[float] = None
    gs_dt: Optional[float] = None

    ref_factor: int = 64
    ref_tau: Optional[float] = None
    cell_timeout: float = 600.0
    amplitude: str = "peak"

    workers: int = 1
    seed: int = 0
    out: str = "out"

    @property
    def coeffs(self) -> CubicQuinticCoeffs:
        return CubicQuinticCoeffs(self.lambda_, self.nu, self.epsilon)

    def solver_params(self, tau: float, t_final: Optional[float] = None) -> SolverParams:
        return SolverParams(self.coeffs, tau, self.t_final if t_final is None else t_final,
                            self.fp_tol, self.fp_maxiter, self.lin_tol, self.lin_maxiter,
                            self.lin_precond)

    @property
    def times(self) -> List[float]:
        return sorted(self.sample_times) if self.sample_times else [self.t_final]

    @property
    def levels(self) -> List[Tuple[float, float]]:
        return list(zip(self.h, self.tau))

    def validate(self) -> "ExperimentConfig":
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.ic not in INITIAL_CONDITIONS:
            raise ConfigError(f"unknown initial condition {self.ic!r}")
        if self.ic == "file" and not self.ic_file:
            raise ConfigError("ic = file needs ic_file")
        if self.lin_precond not in PRECONDITIONERS:
            raise ConfigError(f"lin_precond must be one of {PRECONDITIONERS}")
        if self.amplitude not in ("peak", "mass"):
            raise ConfigError("amplitude must be 'peak' or 'mass'")
        a, b, c, d = self.domain
        if not (b > a and d > c):
            raise ConfigError(f"empty domain {self.domain}")
        if not self.h or not self.tau:
            raise ConfigError("h and tau must be non-empty")
        if any(v <= 0 for v in self.h + self.tau):
            raise ConfigError("h and tau entries must be positive")
        if self.t_final <= 0:
            raise ConfigError("t_final must be positive")
        if any(t <= 0 or t > self.t_final * (1 + 1e-12) for t in self.sample_times):
            raise ConfigError("sample_times must lie in (0, t_final]")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        try:
            self.coeffs
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.experiment in ("converge", "conserve"):
            check_ladder(self.h, self.tau)
        return self


def check_ladder(h: List[float], tau: List[float]):
    """Refinement ladders halve h and tau together, level by level."""
    if len(h) != len(tau):
        raise ConfigError("h and tau ladders must have the same length")
    if len(h) < 2:
        raise ConfigError("a refinement ladder needs at least two levels")
    for i in range(len(h) - 1):
        if abs(h[i] / h[i + 1] - 2.0) > 1e-12 or abs(tau[i] / tau[i + 1] - 2.0) > 1e-12:
            raise ConfigError(f"levels {i} and {i + 1} are not a factor-two refinement in h and tau")


def _parse_float(s: str) -> float:
    s = s.strip()
    if "^" in s:  # allow 2^-5 style powers
        base, exp = s.split("^", 1)
        return float(base) ** float(exp)
    return float(s)


def _parse_optional(conv):
    def parse(s):
        return None if s.strip().lower() in ("", "none") else conv(s)
    return parse


def _parse_list(s: str) -> List[float]:
    return [_parse_float(p) for p in s.split(",") if p.strip()]


def _parse_domain(s: str):
    vals = _parse_list(s)
    if len(vals) != 4:
        raise ValueError("domain needs four numbers a, b, c, d")
    return tuple(vals)


_PARSERS = {
    "experiment": str.strip, "domain": _parse_domain, "h": _parse_list, "tau": _parse_list,
    "t_final": _parse_float, "sample_times": _parse_list,
    "lambda": _parse_float, "nu": _parse_float, "epsilon": _parse_float,
    "fp_tol": _parse_float, "fp_maxiter": int, "lin_tol": _parse_float,
    "lin_maxiter": _parse_optional(int), "lin_precond": str.strip,
    "ic": str.strip, "ic_file": _parse_optional(str.strip), "random_amplitude": _parse_float,
    "A0": _parse_float, "x0": _parse_float, "y0": _parse_float, "d1": _parse_float,
    "d2": _parse_float, "alpha0": _parse_float,
    "gs_power": _parse_float, "gs_half_width": _parse_optional(_parse_float),
    "gs_h": _parse_optional(_parse_float), "gs_tol": _parse_float, "gs_maxiter": int,
    "gs_shift": _parse_optional(_parse_float), "gs_dt": _parse_optional(_parse_float),
    "ref_factor": int, "ref_tau": _parse_optional(_parse_float), "cell_timeout": _parse_float,
    "amplitude": str.strip, "workers": int, "seed": int, "out": str.strip,
}

KEYS = tuple(_PARSERS)


def parse_config(text: str, **overrides) -> ExperimentConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, val = (p.strip() for p in line.split("=", 1))
        if key not in _PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = _PARSERS[key](val)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from exc
    if "lambda" in values:
        values["lambda_"] = values.pop("lambda")
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**values).validate()


def load_config(path, **overrides) -> ExperimentConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"), **overrides)


def dump_config(cfg: ExperimentConfig) -> str:
    """Render a config back to the text format (round-trips through parse_config)."""
    lines = []
    for f in dataclasses.fields(cfg):
        v = getattr(cfg, f.name)
        key = "lambda" if f.name == "lambda_" else f.name
        if v is None:
            text = "none"
        elif isinstance(v, (list, tuple)):
            text = ", ".join(repr(float(x)) for x in v)
        elif isinstance(v, float):
            text = repr(v)
        else:
            text = str(v)
        lines.append(f"{key} = {text}")
    return "\n".join(lines) + "\n"
