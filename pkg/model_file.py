#!/usr/bin/env python3
"""
Model File Module for the Pfaffian Entropy Toolkit

Reads and writes the TOML model format:

    [model]       name, coordinates (U, V, X^1..), description, s0,
                  expect_integrable, nominal_degree
    [intensive]   p = "<expression>"
    [forces]      <X^i> = "<expression>"   one per extra coordinate
    [boundary]    b = "<expression>"       optional, ground-state energy
    [bounds]      <coordinate> = [lower, upper]   optional, default (0, inf)
    [reference]   <coordinate> = <value>
    [analytic]    S = "<expression>", T = "<expression>"   optional

Every problem is reported as a ModelFileError naming the file, the dotted
key and, for expressions, the byte offset inside the expression string.
"""

import hashlib
import json
import math
import sys
import tomllib
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional

from expression_parser import parse
from expressions import Expression, to_source
from pfaffian_forms import ThermoModel
from thermo_errors import ExpressionSyntaxError, ModelFileError, ModelValidationError

SECTIONS = ("model", "intensive", "forces", "boundary", "bounds", "reference", "analytic")


@dataclass(frozen=True)
class ModelFile:
    path: Path
    model: ThermoModel
    digest: str          # sha256 of the file bytes


class ModelFileReader:
    """
    A class to handle parsing of one model file
    """

    def __init__(self, path):
        """
        Initialize the ModelFileReader

        Args:
            path (str | Path): Model file to read
        """
        self.path = Path(path)

    def fail(self, message, key=None, offset=None):
        raise ModelFileError(self.path, message, key, offset)

    def read(self) -> ModelFile:
        """
        Parse and validate the file

        Returns:
            ModelFile: The model together with the digest of the file bytes
        """
        if not self.path.is_file():
            self.fail("model file not found")
        data = self.path.read_bytes()
        try:
            document = tomllib.loads(data.decode("utf-8"))
        except UnicodeDecodeError as exc:
            self.fail(f"not UTF-8 text ({exc.reason} at byte {exc.start})")
        except tomllib.TOMLDecodeError as exc:
            self.fail(f"invalid TOML: {exc}")
        model = self.build(document)
        return ModelFile(self.path, model, hashlib.sha256(data).hexdigest())

    def table(self, document: Dict[str, Any], name: str, required: bool = False) -> Dict[str, Any]:
        value = document.get(name)
        if value is None:
            if required:
                self.fail(f"missing section [{name}]")
            return {}
        if not isinstance(value, dict):
            self.fail(f"[{name}] must be a table", name)
        return value

    def expression(self, key: str, text: Any) -> Expression:
        if not isinstance(text, str):
            self.fail("expression must be a quoted string", key)
        try:
            return parse(text)
        except ExpressionSyntaxError as exc:
            self.fail(str(exc), key, exc.offset)

    def number(self, key: str, value: Any) -> float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.fail(f"expected a number, got {value!r}", key)
        return float(value)

    def build(self, document: Dict[str, Any]) -> ThermoModel:
        unknown = sorted(set(document) - set(SECTIONS))
        if unknown:
            self.fail(f"unknown section(s) {', '.join(unknown)}", unknown[0])

        header = self.table(document, "model", required=True)
        name = header.get("name", self.path.stem)
        if not isinstance(name, str) or not name:
            self.fail("name must be a non-empty string", "model.name")
        coordinates = header.get("coordinates")
        if (not isinstance(coordinates, list) or len(coordinates) < 2
                or not all(isinstance(c, str) and c.isidentifier() for c in coordinates)):
            self.fail("coordinates must list at least two identifiers, energy first then volume",
                      "model.coordinates")
        coordinates = tuple(coordinates)

        intensive = self.table(document, "intensive", required=True)
        if "p" not in intensive:
            self.fail("missing pressure expression", "intensive.p")
        pressure = self.expression("intensive.p", intensive["p"])

        forces_table = self.table(document, "forces")
        extra = set(forces_table) - set(coordinates[2:])
        if extra:
            self.fail(f"force given for unknown coordinate '{sorted(extra)[0]}'", "forces")
        forces = []
        for coordinate in coordinates[2:]:
            if coordinate not in forces_table:
                self.fail(f"missing generalized force for {coordinate}", f"forces.{coordinate}")
            forces.append(self.expression(f"forces.{coordinate}", forces_table[coordinate]))

        boundary = None
        boundary_table = self.table(document, "boundary")
        if "b" in boundary_table:
            boundary = self.expression("boundary.b", boundary_table["b"])

        bounds = {}
        for coordinate, pair in self.table(document, "bounds").items():
            key = f"bounds.{coordinate}"
            if not isinstance(pair, list) or len(pair) != 2:
                self.fail("bounds must be a [lower, upper] pair", key)
            bounds[coordinate] = (self.number(key, pair[0]), self.number(key, pair[1]))

        reference_table = self.table(document, "reference", required=True)
        reference = []
        for coordinate in coordinates:
            if coordinate not in reference_table:
                self.fail(f"missing reference value for {coordinate}", f"reference.{coordinate}")
            reference.append(self.number(f"reference.{coordinate}", reference_table[coordinate]))

        analytic = self.table(document, "analytic")
        entropy = self.expression("analytic.S", analytic["S"]) if "S" in analytic else None
        temperature = self.expression("analytic.T", analytic["T"]) if "T" in analytic else None

        s0 = header.get("s0")
        if s0 is not None:
            s0 = self.number("model.s0", s0)
        expect_integrable = header.get("expect_integrable", True)
        if not isinstance(expect_integrable, bool):
            self.fail("expect_integrable must be true or false", "model.expect_integrable")

        try:
            return ThermoModel(
                name=name,
                coordinates=coordinates,
                pressure=pressure,
                forces=tuple(forces),
                reference=tuple(reference),
                bounds=bounds,
                boundary=boundary,
                analytic_entropy=entropy,
                analytic_temperature=temperature,
                s0=s0,
                expect_integrable=expect_integrable,
                nominal_degree=self.number("model.nominal_degree", header.get("nominal_degree", 0.0)),
                description=str(header.get("description", "")),
            )
        except ModelValidationError as exc:
            self.fail(str(exc), exc.field)


def read_model_file(path) -> ModelFile:
    return ModelFileReader(path).read()


def load_model(path) -> ThermoModel:
    """
    Load a ThermoModel from a TOML model file

    Args:
        path (str | Path): Model file

    Returns:
        ThermoModel: The validated model

    Raises:
        ModelFileError: With file, key and byte offset of the first problem
    """
    return read_model_file(path).model


def _toml_string(text: str) -> str:
    return json.dumps(text, ensure_ascii=False)


def _toml_number(value: float) -> str:
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return repr(float(value))


def dump_model(model: ThermoModel) -> str:
    """Render a model in the TOML model format"""
    lines: List[str] = [
        "[model]",
        f"name = {_toml_string(model.name)}",
        f"coordinates = [{', '.join(_toml_string(c) for c in model.coordinates)}]",
    ]
    if model.description:
        lines.append(f"description = {_toml_string(model.description)}")
    lines.append(f"s0 = {_toml_number(model.s0)}")
    lines.append(f"expect_integrable = {'true' if model.expect_integrable else 'false'}")
    if model.nominal_degree:
        lines.append(f"nominal_degree = {_toml_number(model.nominal_degree)}")

    lines += ["", "[intensive]", f"p = {_toml_string(to_source(model.pressure))}"]
    if model.forces:
        lines += ["", "[forces]"]
        lines += [f"{name} = {_toml_string(to_source(force))}"
                  for name, force in zip(model.extensives, model.forces)]
    if model.boundary is not None:
        lines += ["", "[boundary]", f"b = {_toml_string(to_source(model.boundary))}"]

    custom = {name: pair for name, pair in model.bounds.items() if pair != (0.0, math.inf)}
    if custom:
        lines += ["", "[bounds]"]
        lines += [f"{name} = [{_toml_number(lo)}, {_toml_number(hi)}]" for name, (lo, hi) in custom.items()]

    lines += ["", "[reference]"]
    lines += [f"{name} = {_toml_number(value)}" for name, value in zip(model.coordinates, model.reference)]

    analytic = [(key, expr) for key, expr in (("S", model.analytic_entropy), ("T", model.analytic_temperature))
                if expr is not None]
    if analytic:
        lines += ["", "[analytic]"]
        lines += [f"{key} = {_toml_string(to_source(expr))}" for key, expr in analytic]
    return "\n".join(lines) + "\n"


def write_model(model: ThermoModel, path, force: bool = True) -> Path:
    """
    Write a model file

    Args:
        model (ThermoModel): Model to write
        path (str | Path): Destination
        force (bool): Overwrite an existing file

    Returns:
        Path: The written file
    """
    path = Path(path)
    if path.exists() and not force:
        raise FileExistsError(f"{path} exists (use force to overwrite)")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_model(model), encoding="utf-8")
    return path


def main():
    """
    Command-line interface: validate model files
    """
    if len(sys.argv) < 2:
        print("Usage: python3 model_file.py <model.toml> [model.toml ...]")
        sys.exit(1)

    failed = False
    for argument in sys.argv[1:]:
        try:
            loaded = read_model_file(argument)
            print(f"✓ {argument}: {loaded.model.name} ({', '.join(loaded.model.coordinates)})")
            print(f"  - sha256 {loaded.digest}")
        except ModelFileError as e:
            print(f"✗ {str(e)}")
            failed = True
    sys.exit(3 if failed else 0)


if __name__ == "__main__":
    main()
