#!/usr/bin/env python3
"""
Tests for tolerance configuration
"""

import pytest

from thermo_errors import ConfigurationError
from tolerances import DEFAULT_TOLERANCES, ENVIRONMENT_VARIABLE, Tolerances, load_tolerances


def test_defaults():
    assert DEFAULT_TOLERANCES.integrability == 1e-10
    assert DEFAULT_TOLERANCES.quadrature == 1e-10
    assert DEFAULT_TOLERANCES.boundary_epsilon == 1e-8
    assert DEFAULT_TOLERANCES.lambdas == (0.5, 2.0, 3.0)
    assert load_tolerances(environ={}) == DEFAULT_TOLERANCES


def test_file_then_overrides(tmp_path):
    path = tmp_path / "tolerances.toml"
    path.write_text("[tolerances]\nintegrability = 1e-8\nquadrature = 1e-9\nlambdas = [2, 4]\n",
                    encoding="utf-8")
    tolerances = load_tolerances(path, {"quadrature": 1e-12, "exactness": None}, environ={})
    assert tolerances.integrability == 1e-8
    assert tolerances.quadrature == 1e-12
    assert tolerances.exactness == DEFAULT_TOLERANCES.exactness
    assert tolerances.lambdas == (2.0, 4.0)


def test_environment_variable_names_the_file(tmp_path):
    path = tmp_path / "env.toml"
    path.write_text("max_subdivisions = 500\n", encoding="utf-8")
    tolerances = load_tolerances(environ={ENVIRONMENT_VARIABLE: str(path)})
    assert tolerances.max_subdivisions == 500
    assert isinstance(tolerances.max_subdivisions, int)


@pytest.mark.parametrize("text", [
    "[tolerances]\nintegrability = -1.0\n",
    "[tolerances]\nunknown_setting = 1.0\n",
    "[tolerances]\nquadrature = \"small\"\n",
    "[tolerances]\npath_samples = 2.5\n",
    "[tolerances]\nlambdas = [0.5, -2]\n",
    "[tolerances]\nconvergence_slope = 0.1\n",
    "[tolerances\n",
])
def test_invalid_files(tmp_path, text):
    path = tmp_path / "bad.toml"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(ConfigurationError):
        load_tolerances(path, environ={})


def test_missing_file(tmp_path):
    with pytest.raises(ConfigurationError, match="not found"):
        load_tolerances(tmp_path / "absent.toml", environ={})


def test_replace_validates():
    assert DEFAULT_TOLERANCES.replace(hessian_step=1e-2).hessian_step == 1e-2
    with pytest.raises(ConfigurationError):
        Tolerances(boundary_epsilon=0.0)
