#!/usr/bin/env python3
"""
Model Catalog Module for the Pfaffian Entropy Toolkit

Bundled reference systems with known answers, in reduced units: the photon
gas, the ideal gas, a homogeneous but non-integrable counter-example, a
model violating Planck's form of the third law, and the photon gas shifted
by a ground-state boundary U = b0 V.
"""

import sys
from typing import Callable, Dict, List

from expression_parser import parse
from expressions import const, mul, sub, var
from pfaffian_forms import ThermoModel, build_heat_form, integrability_residuals, radial_apply
from thermo_errors import ThermoFormError


def _number(value: float) -> str:
    return repr(float(value))


def photon_gas() -> ThermoModel:
    """Radiation in a cavity: p = U/(3V), S = U^(3/4) V^(1/4)"""
    return ThermoModel(
        name="photon_gas",
        coordinates=("U", "V"),
        pressure=parse("U/(3*V)"),
        reference=(1.0, 1.0),
        analytic_entropy=parse("U^(3/4)*V^(1/4)"),
        analytic_temperature=parse("4*U^(1/4)/(3*V^(1/4))"),
        description="black-body radiation, S0 = 1 at (1, 1)",
    )


def ideal_gas(c: float = 1.5, R: float = 1.0, s0: float = 2.5) -> ThermoModel:
    """
    Classical ideal gas with heat capacity c N R

    T = U/(cNR), p = U/(cV), mu from the Euler relation, and the entropy
    S = N (s0 + R (c ln(U/N) + ln(V/N))), which turns negative at small U.
    """
    if not (c > 0 and R > 0):
        raise ValueError(f"ideal gas needs c > 0 and R > 0, got c={c}, R={R}")
    c_, r_, s_ = _number(c), _number(R), _number(s0)
    bracket = f"{r_}*({c_}*ln(U/N) + ln(V/N))"
    return ThermoModel(
        name="ideal_gas",
        coordinates=("U", "V", "N"),
        pressure=parse(f"U/({c_}*V)"),
        forces=(parse(f"U/({c_}*N*{r_})*({r_}*({c_} + 1) - {s_} - {bracket})"),),
        reference=(1.0, 1.0, 1.0),
        analytic_entropy=parse(f"N*({s_} + {bracket})"),
        analytic_temperature=parse(f"U/({c_}*N*{r_})"),
        description=f"monatomic-style ideal gas, c = {c}, R = {R}, s0 = {s0}",
    )


def nonintegrable_example() -> ThermoModel:
    """p = U/V, mu = UV/N^2: homogeneous of degree zero, yet l_UVN = U/N^2"""
    return ThermoModel(
        name="nonintegrable",
        coordinates=("U", "V", "N"),
        pressure=parse("U/V"),
        forces=(parse("U*V/N^2"),),
        reference=(1.0, 1.0, 1.0),
        expect_integrable=False,
        description="no entropy exists for these state equations",
    )


def planck_violator() -> ThermoModel:
    """S = V + U^(3/4) V^(1/4): the entropy stays at V as U -> 0"""
    return ThermoModel(
        name="planck_violator",
        coordinates=("U", "V"),
        pressure=parse("4/3*U^(1/4)*V^(-1/4) + U/(3*V)"),
        reference=(1.0, 1.0),
        analytic_entropy=parse("V + U^(3/4)*V^(1/4)"),
        analytic_temperature=parse("4*U^(1/4)/(3*V^(1/4))"),
        description="extensive entropy with a V-dependent limit at T = 0",
    )


def shifted_photon_gas(b0: float = 0.0) -> ThermoModel:
    """
    Photon gas written in B = U - b0 V, ground-state boundary b(V) = b0 V

    p = B/(3V) - b0 so that db/dV + p -> 0 on the boundary; b0 = 0 gives
    the photon gas.
    """
    if b0 < 0:
        raise ValueError(f"b0 must be non-negative, got {b0}")
    base = photon_gas()
    boundary = mul(const(b0), var("V"))
    mapping = {"U": sub(var("U"), boundary)}
    name = "shifted_photon_gas" if b0 == 0 else f"shifted_photon_gas_b{b0:g}"
    return ThermoModel(
        name=name,
        coordinates=base.coordinates,
        pressure=sub(base.pressure.substitute(mapping), const(b0)),
        reference=(1.0 + b0, 1.0),
        boundary=boundary,
        analytic_entropy=base.analytic_entropy.substitute(mapping),
        analytic_temperature=base.analytic_temperature.substitute(mapping),
        description=f"photon gas above the boundary U = {b0:g} V",
    )


class ModelCatalog:
    """
    A class to handle lookup of the bundled reference models
    """

    def __init__(self):
        """Initialize the ModelCatalog"""
        self.constructors: Dict[str, Callable[[], ThermoModel]] = {
            "photon_gas": photon_gas,
            "ideal_gas": ideal_gas,
            "nonintegrable": nonintegrable_example,
            "planck_violator": planck_violator,
            "shifted_photon_gas": shifted_photon_gas,
            "shifted_photon_gas_b1": lambda: shifted_photon_gas(1.0),
        }

    def names(self) -> List[str]:
        return list(self.constructors)

    def get(self, name: str) -> ThermoModel:
        """
        Build a bundled model by name

        Args:
            name (str): One of names()

        Returns:
            ThermoModel: A fresh, validated model
        """
        try:
            constructor = self.constructors[name]
        except KeyError:
            raise KeyError(f"unknown model '{name}' (choose from {', '.join(self.names())})") from None
        return constructor()

    def models(self) -> List[ThermoModel]:
        return [constructor() for constructor in self.constructors.values()]


def main():
    """
    Command-line interface: list the bundled models
    """
    catalog = ModelCatalog()
    print("Bundled models")
    print("=" * 60)
    try:
        for model in catalog.models():
            form = build_heat_form(model)
            residuals = integrability_residuals(form, model.reference)
            worst = max((abs(r.raw) for r in residuals), default=0.0)
            print(f"{model.name}: {', '.join(model.coordinates)}")
            print(f"  - {model.description}")
            print(f"  - f(ref) = {radial_apply(form, model.reference):.6g}, S0 = {model.s0:.6g}")
            print(f"  - largest integrability residual at ref: {worst:.3g}")
    except ThermoFormError as e:
        print(f"✗ Error: {str(e)}")
        sys.exit(1)


if __name__ == "__main__":
    main()
