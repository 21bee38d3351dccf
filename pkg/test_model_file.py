#!/usr/bin/env python3
"""
Tests for reading and writing TOML model files
"""

import hashlib
import math
from pathlib import Path

import pytest

from expression_parser import parse
from model_catalog import ModelCatalog
from model_file import dump_model, load_model, read_model_file, write_model
from pfaffian_forms import ThermoModel, sample_grid
from thermo_errors import ModelFileError, ModelValidationError

SAMPLES = Path(__file__).parent / "sample_models"

PHOTON = """\
[model]
name = "photon"
coordinates = ["U", "V"]

[intensive]
p = "{p}"

[reference]
U = 1.0
V = 1.0
"""


def write(tmp_path, text, name="model.toml"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


@pytest.mark.parametrize("name", ModelCatalog().names())
def test_sample_models_match_the_catalog(name):
    loaded = read_model_file(SAMPLES / f"{name}.toml")
    model = ModelCatalog().get(name)
    assert loaded.model.name == model.name
    assert loaded.model.coordinates == model.coordinates
    assert loaded.model.reference == model.reference
    assert loaded.model.s0 == pytest.approx(model.s0)
    assert loaded.model.expect_integrable == model.expect_integrable
    for point in sample_grid(model, 3):
        assert loaded.model.integrating_factor(point) == pytest.approx(model.integrating_factor(point),
                                                                       rel=1e-12)
        if model.analytic_entropy is not None:
            assert loaded.model.analytic_entropy_at(point) == pytest.approx(model.analytic_entropy_at(point),
                                                                            rel=1e-12)


def test_digest_is_the_sha256_of_the_file():
    path = SAMPLES / "photon_gas.toml"
    assert read_model_file(path).digest == hashlib.sha256(path.read_bytes()).hexdigest()


@pytest.mark.parametrize("model", ModelCatalog().models(), ids=lambda m: m.name)
def test_dump_and_load(tmp_path, model):
    loaded = load_model(write_model(model, tmp_path / f"{model.name}.toml"))
    assert loaded.name == model.name
    assert loaded.pressure == model.pressure
    assert loaded.forces == model.forces
    assert loaded.boundary == model.boundary
    assert loaded.analytic_entropy == model.analytic_entropy
    assert loaded.reference == model.reference
    assert loaded.s0 == model.s0
    assert dump_model(loaded) == dump_model(model)


def test_custom_bounds_are_written(tmp_path):
    model = ThermoModel("boxed", ("U", "V"), parse("U/(3*V)"), reference=(1.0, 1.0),
                        bounds={"U": (0.0, 4.0), "V": (0.5, math.inf)})
    text = dump_model(model)
    assert "[bounds]" in text
    assert "V = [0.5, inf]" in text
    loaded = load_model(write(tmp_path, text))
    assert loaded.bounds == {"U": (0.0, 4.0), "V": (0.5, math.inf)}


def test_write_model_refuses_to_overwrite(tmp_path):
    path = write(tmp_path, "")
    with pytest.raises(FileExistsError):
        write_model(ModelCatalog().get("photon_gas"), path, force=False)


def test_syntax_error_is_located(tmp_path):
    path = write(tmp_path, PHOTON.format(p="U/(3*V"))
    with pytest.raises(ModelFileError) as info:
        load_model(path)
    assert info.value.key == "intensive.p"
    assert info.value.offset == 6
    assert info.value.path == str(path)
    assert "[intensive.p] @ byte 6" in str(info.value)


def test_unknown_variable_is_a_validation_error(tmp_path):
    path = write(tmp_path, PHOTON.format(p="U/(3*W)"))
    with pytest.raises(ModelValidationError, match="unknown variables"):
        load_model(path)


@pytest.mark.parametrize("text, key", [
    ('[model]\ncoordinates = ["U", "V"]\n[intensive]\n[reference]\nU = 1.0\nV = 1.0\n', "intensive.p"),
    ('[model]\ncoordinates = ["U"]\n[intensive]\np = "U"\n[reference]\nU = 1.0\n', "model.coordinates"),
    ('[model]\ncoordinates = ["U", "V", "N"]\n[intensive]\np = "U/V"\n'
     '[reference]\nU = 1.0\nV = 1.0\nN = 1.0\n', "forces.N"),
    (PHOTON.format(p="U/(3*V)") + "[extra]\nx = 1\n", "extra"),
    (PHOTON.format(p="U/(3*V)").replace("V = 1.0", "V = \"one\""), "reference.V"),
    (PHOTON.format(p="U/(3*V)") + "[bounds]\nU = [0.0]\n", "bounds.U"),
    (PHOTON.format(p="U/(3*V)").replace('[model]', '[model]\nexpect_integrable = "yes"'),
     "model.expect_integrable"),
])
def test_structural_errors_name_the_key(tmp_path, text, key):
    with pytest.raises(ModelFileError) as info:
        load_model(write(tmp_path, text))
    assert info.value.key == key


def test_missing_file(tmp_path):
    with pytest.raises(ModelFileError, match="not found"):
        load_model(tmp_path / "absent.toml")


def test_invalid_toml(tmp_path):
    with pytest.raises(ModelFileError, match="invalid TOML"):
        load_model(write(tmp_path, "[model\nname = 1\n"))


def test_reference_outside_the_domain(tmp_path):
    text = PHOTON.format(p="U/(3*V)") + "[bounds]\nV = [2.0, 3.0]\n"
    with pytest.raises(ModelFileError, match="not strictly inside") as info:
        load_model(write(tmp_path, text))
    assert isinstance(info.value, ModelValidationError)
    assert info.value.key == "reference.V"


@pytest.mark.parametrize("text, key", [
    (PHOTON.format(p="U/(3*W)"), "intensive.p"),
    (PHOTON.format(p="-2*U/V"), "intensive.p"),
    (PHOTON.format(p="U/(3*V)") + '[boundary]\nb = "U/2"\n', "boundary.b"),
    (PHOTON.format(p="U/(3*V)") + '[boundary]\nb = "2*V"\n', "boundary.b"),
    (PHOTON.format(p="U/(3*V)") + "[bounds]\nV = [3.0, 2.0]\n", "bounds.V"),
    (PHOTON.format(p="U/(3*V)").replace("[model]", "[model]\ns0 = -1.0"), "model.s0"),
])
def test_model_requirements_name_the_key(tmp_path, text, key):
    with pytest.raises(ModelFileError) as info:
        load_model(write(tmp_path, text))
    assert info.value.key == key
    assert f"[{key}]" in str(info.value)


def test_validation_error_carries_the_field():
    with pytest.raises(ModelValidationError) as info:
        ThermoModel("boxed", ("U", "V"), parse("U/(3*V)"), reference=(1.0, 5.0), bounds={"V": (0.0, 2.0)})
    assert info.value.field == "reference.V"
