#!/usr/bin/env python3
"""
Example Usage Scripts for the Pfaffian Entropy Toolkit

This file contains various examples showing how to use the different
modules and the command-line pipeline programmatically.
"""

import math
import tempfile
from pathlib import Path

# Import our modules
from entropy_analyzer import entropy_hessian, leaf_solution, third_law_classify
from entropy_reconstructor import EntropyField, PathSpec, gibbs_duhem_reconstruct
from model_catalog import ModelCatalog
from model_file import load_model, write_model
from pfaffian_entropy import main as pfaffian_entropy_main
from pfaffian_forms import build_heat_form, check_homogeneity, integrability_residuals, sample_grid, worst_residual


def example_1_basic_reconstruction():
    """
    Example 1: Entropy and temperature of the photon gas
    """
    print("Example 1: Photon Gas Entropy")
    print("=" * 50)

    model = ModelCatalog().get("photon_gas")
    field = EntropyField(model)

    for point in [(1.0, 1.0), (16.0, 1.0), (16.0, 8.0)]:
        value = field.evaluate(point)
        print(f"S{point} = {value.entropy:.10g}  (closed form {model.analytic_entropy_at(point):.10g})")
        print(f"T{point} = {field.temperature(point):.10g}")


def example_2_step_by_step():
    """
    Example 2: Step-by-step checks before reconstructing
    """
    print("\nExample 2: Step-by-Step Checks")
    print("=" * 50)

    catalog = ModelCatalog()
    for name in ["ideal_gas", "nonintegrable"]:
        model = catalog.get(name)
        form = build_heat_form(model)
        samples = sample_grid(model, 3)

        # Step 1: homogeneity of the heat form
        print(f"\nStep 1: Homogeneity of '{name}'")
        degree = check_homogeneity(form, samples, domain=model.contains)
        print(f"✓ degree 1: {degree.passed}")

        # Step 2: Frobenius residuals at the reference state
        print("Step 2: Integrability")
        residual = worst_residual(integrability_residuals(form, model.reference))
        print(f"worst residual: {residual:.3g}")

        # Step 3: reconstruct only what passed
        if residual <= 1e-10:
            print("Step 3: Reconstruction")
            print(f"S(reference) = {EntropyField(model).entropy(model.reference):.10g}")
        else:
            print("✗ Step 3 skipped: no entropy exists for this form")


def example_3_stability_and_third_law():
    """
    Example 3: Concavity and the approach to T = 0
    """
    print("\nExample 3: Stability and Third Law")
    print("=" * 50)

    catalog = ModelCatalog()

    report = entropy_hessian(EntropyField(catalog.get("ideal_gas")), (1.0, 1.0, 1.0))
    print(f"Ideal gas Hessian at (1, 1, 1): {report.verdict}")
    for row in report.hessian:
        print("  " + "  ".join(f"{value:8.4f}" for value in row))

    for name in ["photon_gas", "planck_violator", "ideal_gas"]:
        classification = third_law_classify(EntropyField(catalog.get(name)), params={"V": 1.0})
        print(f"{name}: {classification.classification}")


def example_4_leaves_and_gibbs_duhem():
    """
    Example 4: Constant-entropy leaves and the Gibbs-Duhem route to 1/T
    """
    print("\nExample 4: Leaves and Gibbs-Duhem")
    print("=" * 50)

    model = ModelCatalog().get("photon_gas")
    field = EntropyField(model)
    for c in [1.0, 2.0, 4.0]:
        solution = leaf_solution(field, c, {"V": 1.0})
        print(f"S = {c}: U = {solution.energy:.10g}  (closed form {c ** (4.0 / 3.0):.10g})")

    path = PathSpec.through(model, (1.0, 1.0), (16.0, 1.0))
    change = gibbs_duhem_reconstruct(model, path)
    print(f"delta log(1/T) = {change:.12g}  (closed form {-math.log(2.0):.12g})")


def example_5_model_files():
    """
    Example 5: Writing a model file and running the pipeline on it
    """
    print("\nExample 5: Model Files and the Pipeline")
    print("=" * 50)

    with tempfile.TemporaryDirectory() as directory:
        path = write_model(ModelCatalog().get("shifted_photon_gas_b1"), Path(directory) / "shifted.toml")
        model = load_model(path)
        print(f"Loaded '{model.name}' with coordinates {model.coordinates}")

        code = pfaffian_entropy_main(["check", str(path)])
        print(f"check exit code: {code}")
        code = pfaffian_entropy_main(["leaf", str(path), "--s-value", "2", "--params", "V=1"])
        print(f"leaf exit code: {code}")


def main():
    """
    Run all examples
    """
    print("Pfaffian Entropy Toolkit - Examples")
    print("=" * 60)

    example_1_basic_reconstruction()
    example_2_step_by_step()
    example_3_stability_and_third_law()
    example_4_leaves_and_gibbs_duhem()
    example_5_model_files()

    print("\n" + "=" * 60)
    print("Examples completed!")


if __name__ == "__main__":
    main()
