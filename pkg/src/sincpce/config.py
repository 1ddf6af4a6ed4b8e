"""Run configuration: strict YAML schema mapped onto dataclasses.

Schema (all sections except ``reference`` required, unknown keys rejected):

    domain:
      x: [-1.0, 1.0]        # [lo, hi], lo < hi
      y: [-1.0, 1.0]
    stochastic:
      K: 1                  # number of uniform random variables, >= 1
      P: 3                  # total chaos degree, >= 0
    fields:
      a0: "2"               # mean diffusion field (expression in x, y)
      b0: 1.0               # fluctuation amplitude
      a: ["1"]              # K fluctuation fields
      f: "-1"               # forcing, problem reads -div(a grad u) = f
    solver:
      N: 5                  # Sinc half-count per axis, n = 2N+1
      tau: 1000.0           # boundary row weight, > 0
      h: 0.8                # optional step size; default 4pi/(3N)
    reference:              # optional, defaults to kind "none"
      kind: semi-analytic   # semi-analytic | fd-fine | sampled | none
      fd_n: 161             # fd-fine grid points per axis
      samples: 100          # sampled: Gauss points per random dimension
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import yaml

from .errors import ConfigError
from .model import SpdeProblem, parse_coefficient

__all__ = ["RunConfig", "parse_config", "load_config", "bundled_config", "REFERENCE_KINDS"]

REFERENCE_KINDS = ("semi-analytic", "fd-fine", "sampled", "none")


@dataclass(frozen=True)
class RunConfig:
    problem: SpdeProblem
    P: int
    N: int
    tau: float
    h: Optional[float]
    reference_kind: str
    reference_fd_n: int
    reference_samples: int
    raw: dict

    @property
    def K(self) -> int:
        return self.problem.K


def _section(data: dict, name: str, required: bool = True) -> dict:
    if name not in data:
        if required:
            raise ConfigError(f"missing section '{name}'")
        return {}
    sec = data[name]
    if not isinstance(sec, dict):
        raise ConfigError(f"section '{name}' must be a mapping, got {type(sec).__name__}")
    return sec


def _reject_unknown(sec: dict, name: str, allowed: tuple[str, ...]):
    unknown = sorted(set(sec) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) {unknown} in section '{name}'")


def _get(sec: dict, name: str, key: str, default=None, required: bool = True):
    if key not in sec:
        if required:
            raise ConfigError(f"missing key '{key}' in section '{name}'")
        return default
    return sec[key]


def _as_int(val, where: str, lo: int) -> int:
    if not isinstance(val, int) or isinstance(val, bool):
        raise ConfigError(f"{where} must be an integer, got {val!r}")
    if val < lo:
        raise ConfigError(f"{where} must be >= {lo}, got {val}")
    return val


def _as_float(val, where: str, positive: bool = False) -> float:
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{where} must be a number, got {val!r}")
    v = float(val)
    if positive and v <= 0.0:
        raise ConfigError(f"{where} must be positive, got {v}")
    return v


def _as_interval(val, where: str) -> tuple[float, float]:
    if not isinstance(val, (list, tuple)) or len(val) != 2:
        raise ConfigError(f"{where} must be a [lo, hi] pair, got {val!r}")
    lo = _as_float(val[0], f"{where}[0]")
    hi = _as_float(val[1], f"{where}[1]")
    if lo >= hi:
        raise ConfigError(f"{where} must satisfy lo < hi, got {val!r}")
    return lo, hi


def _as_expr(val, where: str):
    if not isinstance(val, str):
        raise ConfigError(f"{where} must be an expression string, got {val!r}")
    return parse_coefficient(val)


def parse_config(data: Any, origin: str = "<config>") -> RunConfig:
    """Validate a parsed YAML document and build the run configuration."""
    if not isinstance(data, dict):
        raise ConfigError(f"{origin}: top level must be a mapping")
    _reject_unknown(data, "<top>", ("domain", "stochastic", "fields", "solver", "reference"))

    dom = _section(data, "domain")
    _reject_unknown(dom, "domain", ("x", "y"))
    x_iv = _as_interval(_get(dom, "domain", "x"), "domain.x")
    y_iv = _as_interval(_get(dom, "domain", "y"), "domain.y")

    sto = _section(data, "stochastic")
    _reject_unknown(sto, "stochastic", ("K", "P"))
    K = _as_int(_get(sto, "stochastic", "K"), "stochastic.K", 1)
    P = _as_int(_get(sto, "stochastic", "P"), "stochastic.P", 0)

    fld = _section(data, "fields")
    _reject_unknown(fld, "fields", ("a0", "b0", "a", "f"))
    a0 = _as_expr(_get(fld, "fields", "a0"), "fields.a0")
    b0 = _as_float(_get(fld, "fields", "b0"), "fields.b0")
    a_list = _get(fld, "fields", "a")
    if not isinstance(a_list, list) or len(a_list) != K:
        raise ConfigError(
            f"fields.a must be a list of K = {K} expressions, got {a_list!r}"
        )
    a_k = tuple(_as_expr(s, f"fields.a[{i}]") for i, s in enumerate(a_list))
    f = _as_expr(_get(fld, "fields", "f"), "fields.f")

    sol = _section(data, "solver")
    _reject_unknown(sol, "solver", ("N", "tau", "h"))
    N = _as_int(_get(sol, "solver", "N"), "solver.N", 1)
    tau = _as_float(_get(sol, "solver", "tau", default=1e3, required=False), "solver.tau", positive=True)
    h_raw = _get(sol, "solver", "h", default=None, required=False)
    h = None if h_raw is None else _as_float(h_raw, "solver.h", positive=True)

    ref = _section(data, "reference", required=False)
    _reject_unknown(ref, "reference", ("kind", "fd_n", "samples"))
    kind = _get(ref, "reference", "kind", default="none", required=False)
    if kind not in REFERENCE_KINDS:
        raise ConfigError(f"reference.kind must be one of {REFERENCE_KINDS}, got {kind!r}")
    fd_n = _as_int(_get(ref, "reference", "fd_n", default=161, required=False), "reference.fd_n", 3)
    samples = _as_int(
        _get(ref, "reference", "samples", default=100, required=False), "reference.samples", 1
    )

    problem = SpdeProblem(domain=(x_iv, y_iv), K=K, a0=a0, b0=b0, a_k=a_k, f=f)
    return RunConfig(
        problem=problem,
        P=P,
        N=N,
        tau=tau,
        h=h,
        reference_kind=kind,
        reference_fd_n=fd_n,
        reference_samples=samples,
        raw=data,
    )


def load_config(path: str | Path) -> RunConfig:
    """Read and validate a YAML run configuration file."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        data = yaml.safe_load(p.read_text())
    except yaml.YAMLError as e:
        raise ConfigError(f"{p}: invalid YAML: {e}") from e
    return parse_config(data, origin=str(p))


def bundled_config(name: str) -> Path:
    """Path to a packaged example configuration ('example1' or 'example2')."""
    here = Path(__file__).resolve().parent / "configs" / f"{name}.yaml"
    if not here.is_file():
        raise ConfigError(f"no bundled config named {name!r}")
    return here
