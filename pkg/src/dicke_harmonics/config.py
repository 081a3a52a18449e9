"""Scenario configuration: a flat key-value document, overridable from the command line."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields, replace

from .effective_model import ModelParams, Phase, classify_phase
from .errors import ConfigError

#: Offset of the default ``lambda0`` from ``lambda_c`` when only ``eta`` is given.
DEFAULT_LAMBDA0_OFFSET = 1e-3

_ALIASES = {"lambda": "lam", "lambda0": "lam0", "tmax": "t_max", "mmax": "m_max", "nmax": "n_max",
            "mu-max": "mu_max", "q-times": "q_times"}


@dataclass(frozen=True)
class ScenarioConfig:
    omega: float = 1.0
    omega0: float = 1.0
    eta: float | None = None
    lam: float | None = None
    lam0: float | None = None
    phase: str = "normal"
    bogoliubov: str = "asymptotic"
    apply_cos: bool = False
    t_max: float | None = None
    dt: float | None = None
    tol: float = 1e-12
    m_max: int | None = None
    n_max: int | None = None
    mu_max: int | None = None
    out: str | None = None
    format: str = "csv"
    threads: int | None = None
    etas: tuple | None = None
    lambdas: tuple | None = None
    protocol: str = "both"
    q_times: tuple = field(default_factory=tuple)

    @property
    def params(self) -> ModelParams:
        return ModelParams(self.omega, self.omega0)

    @property
    def phase_enum(self) -> Phase:
        return Phase(self.phase)

    def check_common(self) -> None:
        if not (self.omega > 0 and self.omega0 > 0):
            raise ConfigError("omega and omega0 must be positive")
        if not 0 < self.tol <= 1e-4:
            raise ConfigError(f"tol must lie in (0, 1e-4], got {self.tol}")
        if self.phase not in ("normal", "superradiant"):
            raise ConfigError(f"phase must be normal or superradiant, got {self.phase!r}")
        if self.bogoliubov not in ("asymptotic", "exact"):
            raise ConfigError(f"bogoliubov must be asymptotic or exact, got {self.bogoliubov!r}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        if self.eta is not None and self.lam is not None:
            raise ConfigError("give either eta or the (lambda, lambda0) pair, not both")
        for name in ("m_max", "n_max", "mu_max", "threads"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise ConfigError(f"{name} must be positive")

    def check_grid(self) -> None:
        if self.dt is None or not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if self.t_max is None or not self.t_max > 0:
            raise ConfigError(f"t_max must be positive, got {self.t_max}")

    def couplings(self):
        """Resolve ``(lam0, lam, eta)`` from either input mode."""
        lc = self.params.lambda_c
        if self.eta is not None:
            if not self.eta > 0:
                raise ConfigError("eta must be positive")
            lam0 = self.lam0
            if lam0 is None:
                sign = -1.0 if self.phase == "normal" else 1.0
                lam0 = lc + sign * DEFAULT_LAMBDA0_OFFSET
            lam = lc + self.eta * (lam0 - lc)
        elif self.lam is not None and self.lam0 is not None:
            lam0, lam = self.lam0, self.lam
        else:
            raise ConfigError("need eta (optionally with lambda0) or both lambda and lambda0")
        if lam < 0 or lam0 < 0:
            raise ConfigError("couplings must be non-negative")
        try:
            p0, p = classify_phase(self.params, lam0), classify_phase(self.params, lam)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if Phase.CRITICAL in (p0, p) or p0 is not p:
            raise ConfigError("same-phase comparison required: lambda and lambda0 must lie on one side of lambda_c")
        return lam0, lam, (lam - lc) / (lam0 - lc)

    def time_grid(self):
        import numpy as np
        self.check_grid()
        n = int(math.floor(self.t_max / self.dt + 1e-9))
        return np.arange(n + 1) * self.dt

    def resolved(self) -> dict:
        d = asdict(self)
        for k in ("etas", "lambdas", "q_times"):
            if d[k] is not None:
                d[k] = list(d[k])
        return d


def _coerce(name, value):
    kinds = {f.name: f.type for f in fields(ScenarioConfig)}
    if name not in kinds:
        raise ConfigError(f"unknown configuration key {name!r}")
    if value is None:
        return None
    try:
        if name in ("etas", "lambdas", "q_times"):
            if isinstance(value, str):
                value = [v for v in value.split(",") if v.strip()]
            return tuple(float(v) for v in value)
        if name in ("m_max", "n_max", "mu_max", "threads"):
            return int(value)
        if name == "apply_cos":
            return value if isinstance(value, bool) else str(value).lower() in ("1", "true", "yes")
        if name in ("phase", "bogoliubov", "out", "format", "protocol"):
            return str(value)
        return float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {name}: {value!r}") from exc


def load_config_file(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict) or any(isinstance(v, dict) for v in doc.values()):
        raise ConfigError("config must be a flat JSON object")
    return doc


def build_config(file_values: dict | None = None, overrides: dict | None = None) -> ScenarioConfig:
    """File values first, then non-None overrides; keys accept the CLI spellings too."""
    cfg = ScenarioConfig()
    merged = {}
    for source in (file_values or {}, overrides or {}):
        for k, v in source.items():
            if v is None:
                continue
            merged[_ALIASES.get(k, k).replace("-", "_")] = v
    updates = {k: _coerce(k, v) for k, v in merged.items()}
    cfg = replace(cfg, **updates)
    cfg.check_common()
    return cfg
