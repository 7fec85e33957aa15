"""Declarative experiment description and its strict JSON loader.

Kernel, measure, ridge rule and target are small objects tagged by a
``"type"`` key, for example ``{"type": "sinc", "c": 25}``. Every object is
checked for unknown keys.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Union

from ..errors import ConfigError
from ..kernels import Gaussian, KernelSpec, Sinc, TensorProduct
from ..sampling import GaussianMeasure, MeasureSpec, TruncatedStdNormal, UniformCube


@dataclass(frozen=True)
class PaperFixed:
    value: float


@dataclass(frozen=True)
class ExponentialRule:
    # None means "derive from the kernel": b = 2 and N_b = ceil(e c/2) for
    # Sinc, b = (c + xi + gamma)/xi for Gaussian (N_b must then be given)
    b: Optional[float] = None
    n_b: Optional[int] = None


@dataclass(frozen=True)
class RefinedSinc:
    pass


LamRule = Union[PaperFixed, ExponentialRule, RefinedSinc]


@dataclass(frozen=True)
class SincRatio:
    freq: float


@dataclass(frozen=True)
class GaussianSynthetic:
    xi: float
    c: float


Target = Optional[Union[SincRatio, GaussianSynthetic]]


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    kernel: KernelSpec
    measure: MeasureSpec
    n: int
    n_trunc_list: tuple
    sigma_list: tuple = (0.0,)
    realizations: int = 10
    master_seed: int = 0
    lam_rule: Optional[LamRule] = None
    regression_target: Target = None
    output_dir: Optional[str] = None
    # reference-measure parameter of the Gaussian closed-form spectrum
    gaussian_c: float = 1.0
    workers: int = 1

    def __post_init__(self):
        if self.experiment not in ("spectra", "regression"):
            raise ConfigError(f"experiment must be 'spectra' or 'regression', got {self.experiment!r}")
        if self.realizations < 1:
            raise ConfigError("realizations must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if not self.n_trunc_list:
            raise ConfigError("n_trunc_list must not be empty")
        if min(self.n_trunc_list) < 1 or max(self.n_trunc_list) > self.n:
            raise ConfigError(f"every truncation order must lie in [1, n={self.n}]")
        if not self.sigma_list or any(not s >= 0 or not math.isfinite(s) for s in self.sigma_list):
            raise ConfigError("sigma_list must hold finite nonnegative values")
        if self.master_seed < 0:
            raise ConfigError("master_seed must be nonnegative")
        if self.kernel.dim != self.measure.dim:
            raise ConfigError(f"kernel dimension {self.kernel.dim} != measure dimension {self.measure.dim}")

    def with_overrides(self, **kw) -> "ExperimentConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw) if kw else self


def _take(obj, where, required=(), optional=()):
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected an object, got {type(obj).__name__}")
    unknown = set(obj) - set(required) - set(optional)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    missing = [k for k in required if k not in obj]
    if missing:
        raise ConfigError(f"{where}: missing keys {missing}")
    return obj


def _num(v, where, integer=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {v!r}")
    if integer:
        if isinstance(v, float) and not v.is_integer():
            raise ConfigError(f"{where}: expected an integer, got {v!r}")
        return int(v)
    return float(v)


def _tagged(obj, where):
    if not isinstance(obj, dict) or "type" not in obj:
        raise ConfigError(f"{where}: expected an object with a 'type' key")
    return obj["type"]


def parse_kernel(obj, where="kernel"):
    """Returns ``(kernel, gaussian_c)``; ``gaussian_c`` is only meaningful for Gaussian kernels."""
    tag = _tagged(obj, where)
    try:
        if tag == "sinc":
            _take(obj, where, ("type", "c"))
            return Sinc(_num(obj["c"], f"{where}.c")), 1.0
        if tag == "gaussian":
            _take(obj, where, ("type", "xi"), ("c",))
            return Gaussian(_num(obj["xi"], f"{where}.xi")), _num(obj.get("c", 1.0), f"{where}.c")
        if tag == "tensor":
            _take(obj, where, ("type", "base", "d"))
            base, c = parse_kernel(obj["base"], f"{where}.base")
            return TensorProduct(base, _num(obj["d"], f"{where}.d", integer=True)), c
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{where}: {exc}") from exc
    raise ConfigError(f"{where}: unknown kernel type {tag!r}")


def parse_measure(obj, where="measure"):
    tag = _tagged(obj, where)
    try:
        if tag == "uniform_cube":
            _take(obj, where, ("type",), ("d",))
            return UniformCube(_num(obj.get("d", 1), f"{where}.d", integer=True))
        if tag == "truncated_std_normal":
            _take(obj, where, ("type",))
            return TruncatedStdNormal()
        if tag == "gaussian_measure":
            _take(obj, where, ("type", "c"))
            return GaussianMeasure(_num(obj["c"], f"{where}.c"))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{where}: {exc}") from exc
    raise ConfigError(f"{where}: unknown measure type {tag!r}")


def parse_lam_rule(obj, where="lam_rule"):
    if obj is None:
        return None
    tag = _tagged(obj, where)
    if tag == "paper_fixed":
        _take(obj, where, ("type", "value"))
        v = _num(obj["value"], f"{where}.value")
        if not v > 0:
            raise ConfigError(f"{where}.value must be positive")
        return PaperFixed(v)
    if tag == "exponential_rule":
        _take(obj, where, ("type",), ("b", "n_b"))
        b = _num(obj["b"], f"{where}.b") if "b" in obj else None
        n_b = _num(obj["n_b"], f"{where}.n_b", integer=True) if "n_b" in obj else None
        if (b is not None and b <= 0) or (n_b is not None and n_b < 1):
            raise ConfigError(f"{where}: need b > 0 and n_b >= 1")
        return ExponentialRule(b, n_b)
    if tag == "refined_sinc":
        _take(obj, where, ("type",))
        return RefinedSinc()
    raise ConfigError(f"{where}: unknown rule type {tag!r}")


def parse_target(obj, where="regression_target"):
    if obj is None:
        return None
    tag = _tagged(obj, where)
    if tag == "none":
        _take(obj, where, ("type",))
        return None
    if tag == "sinc_ratio":
        _take(obj, where, ("type", "freq"))
        return SincRatio(_num(obj["freq"], f"{where}.freq"))
    if tag == "gaussian_synthetic":
        _take(obj, where, ("type", "xi", "c"))
        return GaussianSynthetic(_num(obj["xi"], f"{where}.xi"), _num(obj["c"], f"{where}.c"))
    raise ConfigError(f"{where}: unknown target type {tag!r}")


_REQUIRED = ("experiment", "kernel", "measure", "n", "n_trunc_list")
_OPTIONAL = ("sigma_list", "realizations", "master_seed", "lam_rule", "regression_target",
             "output_dir", "workers")


def config_from_dict(obj: dict) -> ExperimentConfig:
    _take(obj, "config", _REQUIRED, _OPTIONAL)
    kernel, gc = parse_kernel(obj["kernel"])
    for key in ("n_trunc_list", "sigma_list"):
        if key in obj and not isinstance(obj[key], list):
            raise ConfigError(f"{key} must be a list")
    out_dir = obj.get("output_dir")
    if out_dir is not None and not isinstance(out_dir, str):
        raise ConfigError("output_dir must be a string")
    if not isinstance(obj["experiment"], str):
        raise ConfigError("experiment must be a string")
    return ExperimentConfig(
        experiment=obj["experiment"],
        kernel=kernel,
        measure=parse_measure(obj["measure"]),
        n=_num(obj["n"], "n", integer=True),
        n_trunc_list=tuple(_num(v, "n_trunc_list", integer=True) for v in obj["n_trunc_list"]),
        sigma_list=tuple(_num(v, "sigma_list") for v in obj.get("sigma_list", [0.0])),
        realizations=_num(obj.get("realizations", 10), "realizations", integer=True),
        master_seed=_num(obj.get("master_seed", 0), "master_seed", integer=True),
        lam_rule=parse_lam_rule(obj.get("lam_rule")),
        regression_target=parse_target(obj.get("regression_target")),
        output_dir=out_dir,
        gaussian_c=gc,
        workers=_num(obj.get("workers", 1), "workers", integer=True),
    )


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return config_from_dict(obj)
