"""Simulation configuration.

One flat dataclass carries every physical and numerical parameter; the CLI
mirrors the field names verbatim as flags and a config file uses the same
names as ``key = value`` lines (``#`` starts a comment, flags win over file
values).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields

from .errors import ConfigError
from .fock import truncation_dim


@dataclass(frozen=True)
class SimConfig:
    nbar: float = 100.0          # mean photon number of the initial coherent state
    phi: float = 0.0             # coherent-state phase
    gtau1: float = 2.0           # interaction time of the first qubit (units of 1/g)
    gtau2: float | None = None   # second qubit; defaults to gtau1
    gtau_f: float = 3.0          # free (dissipation-only) time between interactions
    theta: float | None = None   # local-oscillator phase; defaults to phi + pi/2
    p: float | None = None       # quadrature value; 0 lossless, 0.15 in lossy runs
    p_window: tuple[float, float] = (-2.0, 2.0)
    kappa: float = 0.0           # cavity decay rate (units of g)
    gamma: float = 0.0           # atomic spontaneous-emission rate (units of g)
    n_T: float = 0.1             # mean thermal photon number of the environment
    n_f: int = 0                 # Fock cutoff; 0 = auto via truncation_dim(nbar)
    dp: float = 0.01             # quadrature-grid step for trapezoidal integrals
    rtol: float = 1e-8           # integrator relative tolerance
    atol: float = 1e-11          # integrator absolute tolerance
    integrator: str = "rk45"     # "rk45" | "krylov"
    workers: int = 1             # parallel propagations in channel extraction
    output: str | None = None    # output path; None = stdout

    def __post_init__(self):
        if self.nbar < 1:
            raise ConfigError(f"nbar must be >= 1, got {self.nbar}")
        if self.gtau1 < 0 or (self.gtau2 is not None and self.gtau2 < 0) or self.gtau_f < 0:
            raise ConfigError("interaction and free times must be >= 0")
        if self.kappa < 0 or self.gamma < 0 or self.n_T < 0:
            raise ConfigError("loss rates and n_T must be >= 0")
        if self.n_f < 0:
            raise ConfigError("n_f must be >= 0 (0 selects the automatic cutoff)")
        lo, hi = self.p_window
        if not lo < hi:
            raise ConfigError(f"p_window must satisfy lo < hi, got {self.p_window}")
        if self.dp <= 0 or self.rtol <= 0 or self.atol <= 0:
            raise ConfigError("dp, rtol and atol must be positive")
        if self.integrator not in ("rk45", "krylov"):
            raise ConfigError(f"integrator must be 'rk45' or 'krylov', got {self.integrator!r}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    @property
    def lossy(self) -> bool:
        return self.kappa > 0 or self.gamma > 0

    @property
    def resolved_gtau2(self) -> float:
        return self.gtau1 if self.gtau2 is None else self.gtau2

    @property
    def resolved_theta(self) -> float:
        return (self.phi + math.pi / 2.0) if self.theta is None else self.theta

    @property
    def resolved_p(self) -> float:
        if self.p is not None:
            return self.p
        return 0.15 if self.lossy else 0.0

    @property
    def resolved_n_f(self) -> int:
        return self.n_f if self.n_f > 0 else truncation_dim(self.nbar)

    @property
    def alpha(self) -> complex:
        return math.sqrt(self.nbar) * complex(math.cos(self.phi), math.sin(self.phi))

    def header_lines(self) -> list[str]:
        """Effective configuration as '# key = value' lines for output files."""
        out = []
        for f in fields(self):
            value = getattr(self, f.name)
            out.append(f"# {f.name} = {value}")
        out.append(f"# resolved: gtau2={self.resolved_gtau2} theta={self.resolved_theta} "
                   f"p={self.resolved_p} n_f={self.resolved_n_f}")
        return out

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


_BOOL = {"true": True, "false": False}


def _coerce(name: str, text: str):
    text = text.strip()
    if text.lower() in ("none", ""):
        return None
    if name == "p_window":
        parts = [float(v) for v in text.replace(",", " ").split()]
        if len(parts) != 2:
            raise ConfigError(f"p_window needs two numbers, got {text!r}")
        return (parts[0], parts[1])
    if name in ("n_f", "workers"):
        return int(text)
    if name in ("integrator", "output"):
        return text
    return float(text)


def load_config_file(path) -> dict:
    """Parse a flat 'key = value' config file into a field dict."""
    known = {f.name for f in fields(SimConfig)}
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw.rstrip()!r}")
            key, text = (part.strip() for part in line.split("=", 1))
            if key not in known:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = _coerce(key, text)
    return values


def build_config(file_values: dict | None = None, overrides: dict | None = None) -> SimConfig:
    """Merge config-file values with explicit overrides (overrides win)."""
    merged = dict(file_values or {})
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = value
    try:
        return SimConfig(**merged)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
