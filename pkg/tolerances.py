#!/usr/bin/env python3
"""
Tolerance Configuration for the Pfaffian Entropy Toolkit

Numeric thresholds live in one frozen dataclass. Values come from the
defaults below, then from the TOML file named by the TF_TOLERANCES
environment variable, then from explicit overrides (command-line flags).
"""

import dataclasses
import logging
import math
import os
import tomllib
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple

from thermo_errors import ConfigurationError

logger = logging.getLogger(__name__)

ENVIRONMENT_VARIABLE = "TF_TOLERANCES"


@dataclass(frozen=True)
class Tolerances:
    """
    Numeric thresholds shared by every check

    All residual tolerances are applied to normalized residuals (divided by
    max(1, largest coefficient magnitude at the point)).
    """

    integrability: float = 1e-10
    exactness: float = 1e-10
    homogeneity: float = 1e-9
    quadrature: float = 1e-10
    quadrature_abs: float = 1e-14
    max_subdivisions: int = 2000
    path_samples: int = 33
    derivative_check: float = 1e-6
    finite_difference_step: float = 1e-4
    hessian_step: float = 1e-3
    hessian_cross_check: float = 1e-4
    minor_band: float = 1e-9
    symmetry: float = 1e-8
    boundary_epsilon: float = 1e-8
    divergence_slope: float = 0.05
    convergence_slope: float = 0.005
    leaf_rtol: float = 1e-12
    leaf_residual: float = 1e-10
    zero_tolerance: float = 1e-12
    extensivity: float = 1e-8
    lambdas: Tuple[float, ...] = (0.5, 2.0, 3.0)

    def __post_init__(self):
        for item in dataclasses.fields(self):
            value = getattr(self, item.name)
            if item.name == "lambdas":
                if not value or any(not (lam > 0 and math.isfinite(lam)) for lam in value):
                    raise ConfigurationError(f"lambdas must be positive finite numbers: {value}")
                continue
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ConfigurationError(f"tolerance '{item.name}' must be positive, got {value!r}")
        if self.convergence_slope >= self.divergence_slope:
            raise ConfigurationError("convergence_slope must be below divergence_slope")

    def replace(self, **changes) -> "Tolerances":
        """Return a copy with the given fields changed"""
        return dataclasses.replace(self, **changes)


def _coerce(name: str, value: Any) -> Any:
    kinds = {item.name: item.type for item in dataclasses.fields(Tolerances)}
    if name not in kinds:
        raise ConfigurationError(f"unknown tolerance '{name}'")
    if name == "lambdas":
        try:
            return tuple(float(v) for v in value)
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"lambdas must be a list of numbers: {value!r}") from exc
    if name in ("max_subdivisions", "path_samples"):
        if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
            raise ConfigurationError(f"tolerance '{name}' must be an integer, got {value!r}")
        return int(value)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"tolerance '{name}' must be a number, got {value!r}")
    return float(value)


def read_tolerance_file(path) -> Dict[str, Any]:
    """
    Read the [tolerances] table of a TOML configuration file

    Args:
        path (str | Path): Configuration file

    Returns:
        dict: Validated field values
    """
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"tolerance file not found: {path}")
    try:
        with path.open("rb") as handle:
            document = tomllib.load(handle)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigurationError(f"{path}: {exc}") from exc
    table = document.get("tolerances", document)
    if not isinstance(table, dict):
        raise ConfigurationError(f"{path}: [tolerances] must be a table")
    return {name: _coerce(name, value) for name, value in table.items()}


def load_tolerances(path=None, overrides: Optional[Mapping[str, Any]] = None,
                    environ: Optional[Mapping[str, str]] = None) -> Tolerances:
    """
    Build the effective tolerances

    Args:
        path (str, optional): Explicit configuration file (takes the place of
            the TF_TOLERANCES variable)
        overrides (dict, optional): Values that win over everything else;
            entries that are None are ignored
        environ (dict, optional): Environment to consult (defaults to os.environ)

    Returns:
        Tolerances: The merged configuration
    """
    environ = os.environ if environ is None else environ
    values: Dict[str, Any] = {}
    source = path or environ.get(ENVIRONMENT_VARIABLE)
    if source:
        logger.debug("Loading tolerances from %s", source)
        values.update(read_tolerance_file(source))
    for name, value in (overrides or {}).items():
        if value is not None:
            values[name] = _coerce(name, value)
    return Tolerances(**values)


DEFAULT_TOLERANCES = Tolerances()
