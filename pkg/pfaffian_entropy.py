#!/usr/bin/env python3
"""
Pfaffian Entropy Toolkit

Reconstructs the entropy and absolute temperature of a homogeneous
thermodynamic system from its intensive state equations alone. The heat
form omega = dU + p dV - sum xi dX is checked for homogeneity and
integrability, divided by the integrating factor f = U + pV - sum xi X and
integrated along reversible paths; the result is analyzed for concavity,
Gibbs-Duhem consistency and the third law.

Author: Pfaffian Entropy Toolkit
Version: 1.0.0
"""

import argparse
import logging
import sys
import time
from itertools import product
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed
from tqdm import tqdm

from entropy_analyzer import (
    concavity_conditions,
    entropy_hessian,
    leaf_solution,
    third_law_classify,
)
from entropy_reconstructor import EntropyField, gibbs_duhem_reconstruct, route_path
from model_catalog import ModelCatalog
from model_file import ModelFile, read_model_file, write_model
from pfaffian_forms import (
    ThermoModel,
    build_heat_form,
    check_homogeneity,
    exactness_residuals,
    integrability_residuals,
    nontriviality_scan,
    sample_grid,
    worst_residual,
)
from run_report import FAIL, PASS, REFUSED, SKIPPED, WARN, GridRow, RunReport, Verdict, write_grid_csv, write_json
from thermo_errors import (
    ConfigurationError,
    EvaluationError,
    ExpressionError,
    ModelValidationError,
    NoSolutionError,
    NotExactError,
    NotIntegrableError,
    ThermoFormError,
)
from tolerances import Tolerances, load_tolerances

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_CHECK_FAILED, EXIT_INVALID_INPUT, EXIT_NUMERIC_FAILURE = 0, 2, 3, 4
GRID_FAILURE_LIMIT = 0.10
CHECK_POINTS_PER_AXIS = 5


class UsageError(ValueError):
    """A command-line value could not be interpreted"""


def parse_assignments(text: str, model: ThermoModel) -> Dict[str, str]:
    assignments = {}
    for item in filter(None, (part.strip() for part in text.split(","))):
        name, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"expected NAME=VALUE, got '{item}'")
        name = name.strip()
        if name not in model.coordinates:
            raise UsageError(f"unknown coordinate '{name}' (model has {', '.join(model.coordinates)})")
        assignments[name] = value.strip()
    return assignments


def _float(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"not a number: '{text}'") from None


def parse_point(text: str, model: ThermoModel) -> List[float]:
    """
    Parse '1,1' (every coordinate in order) or 'U=1,V=1' (missing ones from the reference)
    """
    if "=" not in text:
        values = [_float(v) for v in text.split(",") if v.strip()]
        if len(values) != len(model.coordinates):
            raise UsageError(f"expected {len(model.coordinates)} values "
                             f"({', '.join(model.coordinates)}), got {len(values)}")
        return values
    assigned = parse_assignments(text, model)
    return [_float(assigned[name]) if name in assigned else ref
            for name, ref in zip(model.coordinates, model.reference)]


def parse_params(text: Optional[str], model: ThermoModel) -> Optional[Dict[str, float]]:
    """Fiber parameters (every coordinate but the energy), as 'V=1' or '1'"""
    if not text:
        return None
    names = model.coordinates[1:]
    if "=" not in text:
        values = [_float(v) for v in text.split(",") if v.strip()]
        if len(values) != len(names):
            raise UsageError(f"expected {len(names)} parameter values ({', '.join(names)})")
        return dict(zip(names, values))
    assigned = parse_assignments(text, model)
    if model.energy in assigned:
        raise UsageError(f"the energy coordinate {model.energy} is not a fiber parameter")
    return {name: _float(value) for name, value in assigned.items()}


def parse_grid(text: str, model: ThermoModel) -> List[List[float]]:
    """
    Parse 'U=1:16:4,V=1' into grid points

    NAME=lo:hi:count spaces count values linearly; NAME=value fixes a
    coordinate; coordinates not named stay at the reference value.
    """
    axes = []
    assigned = parse_assignments(text, model)
    for name, ref in zip(model.coordinates, model.reference):
        axis = assigned.get(name)
        if axis is None:
            axes.append([ref])
            continue
        parts = axis.split(":")
        if len(parts) == 1:
            axes.append([_float(parts[0])])
        elif len(parts) == 3:
            count = _float(parts[2])
            if count < 1 or count != int(count):
                raise UsageError(f"grid count for {name} must be a positive integer, got '{parts[2]}'")
            axes.append(np.linspace(_float(parts[0]), _float(parts[1]), int(count)).tolist())
        else:
            raise UsageError(f"grid axis for {name} must be 'value' or 'lo:hi:count', got '{axis}'")
    return [list(values) for values in product(*axes)]


class ThermoFormPipeline:
    """
    Main class that orchestrates the check, reconstruction and analysis pipelines
    """

    def __init__(self, tolerances: Tolerances, quiet: bool = False, jobs: int = 1):
        """
        Initialize the pipeline

        Args:
            tolerances (Tolerances): Numeric thresholds for every step
            quiet (bool): Suppress the console report (JSON mode)
            jobs (int): Worker threads for grid evaluation
        """
        self.tolerances = tolerances
        self.quiet = quiet
        self.jobs = jobs

    def say(self, text: str = ""):
        if not self.quiet:
            print(text)

    def banner(self, title: str, loaded: ModelFile):
        self.say("=" * 60)
        self.say(title)
        self.say("=" * 60)
        self.say(f"Model file: {loaded.path}")
        self.say(f"Model: {loaded.model.name} ({', '.join(loaded.model.coordinates)})")
        self.say()

    def new_report(self, command: str, loaded: ModelFile) -> RunReport:
        return RunReport(command, loaded.model.name, loaded.digest, self.tolerances,
                         coordinates=loaded.model.coordinates)

    def status(self, verdict: Verdict):
        mark = "✓" if verdict.status == PASS else ("⚠" if verdict.passed else "✗")
        self.say(f"{mark} {verdict.name}: {verdict.detail}")

    # -- check ---------------------------------------------------------------

    def run_checks(self, model: ThermoModel, report: RunReport) -> bool:
        """Homogeneity, integrability, exactness of omega/f and f > 0 on the sample grid"""
        tol = self.tolerances
        samples = sample_grid(model, CHECK_POINTS_PER_AXIS)
        form = build_heat_form(model)

        degree = check_homogeneity(form, samples, tol.lambdas, tol.homogeneity, model.contains)
        self.status(report.add(Verdict(
            "homogeneity", PASS if degree.passed else FAIL,
            f"worst deviation {degree.worst_deviation:.3g} over {len(degree.entries)} entries "
            f"({degree.untestable} untestable)",
            {"worst": degree.worst_deviation, "tolerance": degree.tolerance,
             "failures": degree.failures()})))

        failing, worst = [], 0.0
        for sample in samples:
            residuals = integrability_residuals(form, sample)
            worst = max(worst, worst_residual(residuals))
            failing += [{"point": sample.values, "names": "".join(r.names), "raw": r.raw,
                         "normalized": r.normalized}
                        for r in residuals if abs(r.normalized) > tol.integrability]
        integrable = Verdict("integrability", PASS if not failing else FAIL,
                             f"worst residual {worst:.3g} at {len(samples)} points",
                             {"worst": worst, "tolerance": tol.integrability, "failures": failing})
        self.status(report.add(integrable))
        for entry in failing[:5]:
            self.say(f"  - l_{entry['names']}{tuple(entry['point'])} = {entry['raw']:.10g}")

        quotient = form.divided_by(model.integrating_factor_expression, "omega/f")
        failing, worst = [], 0.0
        for sample in samples:
            try:
                residuals = exactness_residuals(quotient, sample)
            except EvaluationError:
                continue
            worst = max(worst, worst_residual(residuals))
            failing += [{"point": sample.values, "pair": list(r.names), "raw": r.raw,
                         "normalized": r.normalized}
                        for r in residuals if abs(r.normalized) > tol.exactness]
        self.status(report.add(Verdict(
            "exactness", PASS if not failing else FAIL,
            f"omega/f mixed partials, worst {worst:.3g}",
            {"worst": worst, "tolerance": tol.exactness, "failures": failing})))

        positive = nontriviality_scan(model, samples)
        self.status(report.add(Verdict(
            "nontriviality", PASS if positive.passed else WARN,
            f"min f = {positive.minimum:.6g} over {len(positive.values)} samples",
            {"minimum": positive.minimum, "failures": positive.failures})))
        return all(v.passed for v in report.verdicts)

    def check(self, loaded: ModelFile) -> RunReport:
        self.banner("PFAFFIAN FORM CHECK", loaded)
        report = self.new_report("check", loaded)
        passed = self.run_checks(loaded.model, report)
        report.exit_code = EXIT_OK if passed else EXIT_CHECK_FAILED
        self.say()
        self.say("ALL CHECKS PASSED" if passed else "CHECKS FAILED")
        return report

    def gate(self, loaded: ModelFile, report: RunReport, force: bool = False) -> bool:
        """Run the checks before an entropy-based command; False means refused"""
        if force:
            report.add(Verdict("gate", SKIPPED, "checks bypassed with --force"))
            return True
        quiet, self.quiet = self.quiet, True
        try:
            passed = self.run_checks(loaded.model, report)
        finally:
            self.quiet = quiet
        if not passed:
            failed = [v.name for v in report.verdicts if not v.passed]
            verdict = report.add(Verdict("gate", REFUSED, "no entropy exists for this model "
                                                          f"(failed: {', '.join(failed)})"))
            self.status(verdict)
            report.exit_code = EXIT_CHECK_FAILED
        return passed

    # -- reconstruct ---------------------------------------------------------

    def grid_row(self, field: EntropyField, values: Sequence[float]) -> GridRow:
        model = field.model
        point = tuple(float(v) for v in values)
        if not model.contains(point):
            return GridRow(point, None, None, None, None, "outside-domain")
        try:
            value = field.evaluate(point)
            temperature = float(model.integrating_factor(point)) / value.entropy
        except ThermoFormError as exc:
            logger.info("grid point %s failed: %s", point, exc)
            return GridRow(point, None, None, None, None, type(exc).__name__)
        delta = None
        if model.analytic_entropy is not None:
            delta = value.entropy - model.analytic_entropy_at(point)
        status = "ok" if value.reliable else "unreliable"
        return GridRow(point, value.entropy, temperature, value.error, delta, status)

    def reconstruct(self, loaded: ModelFile, grid: str, out: Optional[Path] = None,
                    output_format: str = "csv", force: bool = False) -> RunReport:
        model = loaded.model
        self.banner("ENTROPY RECONSTRUCTION", loaded)
        report = self.new_report("reconstruct", loaded)
        if not self.gate(loaded, report, force):
            return report
        points = parse_grid(grid, model)
        field = EntropyField(model, self.tolerances)
        self.say(f"Evaluating {len(points)} grid points (S0 = {field.s0:.6g} at {field.reference})")
        start_time = time.time()
        rows = Parallel(n_jobs=self.jobs, prefer="threads")(
            delayed(self.grid_row)(field, values)
            for values in tqdm(points, desc="reconstruct", unit="pt", disable=self.quiet))
        report.grid = list(rows)

        failed = sum(row.failed for row in report.grid)
        fraction = report.failure_fraction
        verdict = Verdict("reconstruction", PASS if not failed else FAIL,
                          f"{len(rows) - failed} of {len(rows)} points reconstructed",
                          {"failed": failed, "fraction": fraction})
        self.status(report.add(verdict))
        deltas = [abs(row.analytic_delta / row.entropy) for row in rows
                  if row.analytic_delta is not None and row.entropy]
        if deltas:
            report.results["max_relative_analytic_delta"] = max(deltas)
            self.say(f"  - max |S - S_analytic| / S: {max(deltas):.3g}")
        self.say(f"  - processing time: {time.time() - start_time:.2f} seconds")

        if out is not None:
            if output_format == "csv":
                write_grid_csv(report.grid, model.coordinates, out)
            report.results["output"] = str(out)
        report.exit_code = EXIT_NUMERIC_FAILURE if fraction > GRID_FAILURE_LIMIT else EXIT_OK
        if out is not None and output_format == "json":
            write_json(report, out)
        if out is not None:
            self.say(f"✓ Wrote {output_format.upper()} to {out}")
        return report

    # -- analysis ------------------------------------------------------------

    def hessian(self, loaded: ModelFile, at: Optional[str]) -> RunReport:
        model = loaded.model
        self.banner("ENTROPY HESSIAN", loaded)
        report = self.new_report("hessian", loaded)
        if not self.gate(loaded, report):
            return report
        point = parse_point(at, model) if at else list(model.reference)
        field = EntropyField(model, self.tolerances)
        hessian = entropy_hessian(field, point)
        concavity = concavity_conditions(field, point)
        report.results["hessian"] = hessian
        report.results["concavity"] = concavity
        self.say(f"Point: {model.point(point)}")
        self.say(f"  - S = {hessian.entropy:.12g}")
        for k, (value, sign) in enumerate(zip(hessian.minors, hessian.minor_signs), 1):
            self.say(f"  - leading minor {k}: {value: .6e} (sign {sign:+d})")
        for name, value in concavity.conditions.items():
            self.say(f"  - {name}: {value:.6g}")
        if hessian.cross_check_passed is False:
            self.say(f"⚠ finite-difference cross-check off by {hessian.cross_check_error:.3g}")
        passed = hessian.passed and concavity.passed
        self.status(report.add(Verdict("concavity", PASS if passed else FAIL,
                                       f"{hessian.verdict} ({concavity.method})")))
        report.exit_code = EXIT_OK if passed else EXIT_CHECK_FAILED
        return report

    def third_law(self, loaded: ModelFile, ray: Optional[str]) -> RunReport:
        model = loaded.model
        self.banner("THIRD LAW", loaded)
        report = self.new_report("third-law", loaded)
        if not self.gate(loaded, report):
            return report
        field = EntropyField(model, self.tolerances)
        verdict = third_law_classify(field, params=parse_params(ray, model))
        report.results["third_law"] = verdict
        for gap, value in zip(verdict.gaps, verdict.hat_s):
            self.say(f"  - B = {gap:.0e}: S_hat = {value:.10g}")
        if verdict.slope is not None:
            self.say(f"  - slope d S_hat / d ln B: {verdict.slope:.6g}")
        self.status(report.add(Verdict("third_law", PASS, f"{verdict.classification}: {verdict.detail}",
                                       {"classification": verdict.classification})))
        return report

    def leaf(self, loaded: ModelFile, c: float, params: Optional[str]) -> RunReport:
        model = loaded.model
        if not c > 0:
            raise UsageError(f"--s-value must be positive, got {c}")
        self.banner("LEAF SOLVER", loaded)
        report = self.new_report("leaf", loaded)
        if not self.gate(loaded, report):
            return report
        field = EntropyField(model, self.tolerances)
        solution = leaf_solution(field, c, parse_params(params, model))
        report.results["leaf"] = solution
        self.status(report.add(Verdict(
            "leaf", PASS, f"B_c = {solution.gap:.12g}, U = {solution.energy:.12g} "
                          f"(residual {solution.residual:.2g})")))
        return report

    def gibbs_duhem(self, loaded: ModelFile, start: Optional[str], end: str) -> RunReport:
        model = loaded.model
        self.banner("GIBBS-DUHEM", loaded)
        report = self.new_report("gibbs-duhem", loaded)
        a = parse_point(start, model) if start else list(model.reference)
        b = parse_point(end, model)
        path = route_path(model, a, b, self.tolerances)
        try:
            change = gibbs_duhem_reconstruct(model, path, self.tolerances)
        except NotExactError as exc:
            report.results["exactness"] = exc.report
            self.status(report.add(Verdict("gibbs_duhem", REFUSED, str(exc), exc.report)))
            report.exit_code = EXIT_CHECK_FAILED
            return report
        report.results["delta_log_inverse_temperature"] = change
        report.results["path"] = path
        self.say(f"Path: {path}")
        self.status(report.add(Verdict("gibbs_duhem", PASS, f"delta log(1/T) = {change:.12g}")))
        return report

    def export_models(self, directory: Path) -> List[Path]:
        catalog = ModelCatalog()
        written = []
        for model in catalog.models():
            path = write_model(model, Path(directory) / f"{model.name}.toml")
            self.say(f"✓ {model.name}: {path}")
            written.append(path)
        return written


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Reconstruct entropy and temperature from intensive state equations",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Homogeneity, integrability and exactness checks
  python3 pfaffian_entropy.py check sample_models/photon_gas.toml

  # Entropy and temperature on a grid, written as CSV
  python3 pfaffian_entropy.py reconstruct sample_models/photon_gas.toml --grid "U=1:16:4,V=1:16:4" --out s.csv

  # Hessian and concavity at a state, as JSON
  python3 pfaffian_entropy.py --json hessian sample_models/ideal_gas.toml --at 1,1,1

  # Third-law classification along V = 1
  python3 pfaffian_entropy.py third-law sample_models/planck_violator.toml --ray V=1

  # Energy on the leaf S = 2 at V = 1
  python3 pfaffian_entropy.py leaf sample_models/photon_gas.toml --s-value 2 --params V=1

  # Change of log(1/T) from the Gibbs-Duhem equation
  python3 pfaffian_entropy.py gibbs-duhem sample_models/photon_gas.toml --from 1,1 --to 16,1

Exit codes:
  0 pass, 2 check failure or refusal, 3 invalid input, 4 numeric failure
        """
    )
    parser.add_argument("--json", action="store_true", help="Print the JSON report only")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    parser.add_argument("--tolerances", help="TOML file with a [tolerances] table (default: $TF_TOLERANCES)")
    parser.add_argument("--tol-integrability", type=float, help="Frobenius residual tolerance")
    parser.add_argument("--tol-quadrature", type=float, help="Relative quadrature tolerance")
    parser.add_argument("--tol-exactness", type=float, help="Mixed partial tolerance")
    parser.add_argument("--tol-homogeneity", type=float, help="Relative homogeneity tolerance")
    parser.add_argument("--boundary-epsilon", type=float, help="Smallest B on third-law approaches")

    commands = parser.add_subparsers(dest="command", required=True)

    check = commands.add_parser("check", help="Check homogeneity and integrability")
    check.add_argument("model_file")

    reconstruct = commands.add_parser("reconstruct", help="Reconstruct S and T on a grid")
    reconstruct.add_argument("model_file")
    reconstruct.add_argument("--grid", required=True, help="e.g. 'U=1:16:4,V=1'")
    reconstruct.add_argument("-o", "--out", type=Path, help="Output file")
    reconstruct.add_argument("--format", default="csv", choices=["csv", "json"],
                             help="Output file format (default: csv)")
    reconstruct.add_argument("--force", action="store_true", help="Skip the integrability gate")
    reconstruct.add_argument("-j", "--jobs", type=int, default=1, help="Worker threads (default: 1)")

    hessian = commands.add_parser("hessian", help="Hessian of S and the concavity tests")
    hessian.add_argument("model_file")
    hessian.add_argument("--at", help="State, e.g. '1,1' or 'U=1,V=1' (default: reference)")

    third_law = commands.add_parser("third-law", help="Classify the approach to T = 0")
    third_law.add_argument("model_file")
    third_law.add_argument("--ray", help="Fixed non-energy coordinates, e.g. 'V=1'")

    leaf = commands.add_parser("leaf", help="Solve S = c for the energy above the boundary")
    leaf.add_argument("model_file")
    leaf.add_argument("--s-value", type=float, required=True, help="Entropy level c > 0")
    leaf.add_argument("--params", help="Fixed non-energy coordinates, e.g. 'V=1'")

    gibbs = commands.add_parser("gibbs-duhem", help="Change of log(1/T) between two states")
    gibbs.add_argument("model_file")
    gibbs.add_argument("--from", dest="start", help="Start state (default: reference)")
    gibbs.add_argument("--to", dest="end", required=True, help="End state")

    export = commands.add_parser("export-models", help="Write the bundled models as model files")
    export.add_argument("directory", type=Path)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Command-line interface for the Pfaffian Entropy Toolkit
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    try:
        tolerances = load_tolerances(args.tolerances, {
            "integrability": args.tol_integrability,
            "quadrature": args.tol_quadrature,
            "exactness": args.tol_exactness,
            "homogeneity": args.tol_homogeneity,
            "boundary_epsilon": args.boundary_epsilon,
        })
    except ConfigurationError as e:
        print(f"✗ Invalid tolerances: {str(e)}", file=sys.stderr)
        return EXIT_INVALID_INPUT

    pipeline = ThermoFormPipeline(tolerances, quiet=args.json, jobs=getattr(args, "jobs", 1))
    if args.command == "export-models":
        pipeline.export_models(args.directory)
        return EXIT_OK

    report = None
    try:
        loaded = read_model_file(args.model_file)
        if args.command == "check":
            report = pipeline.check(loaded)
        elif args.command == "reconstruct":
            report = pipeline.reconstruct(loaded, args.grid, args.out, args.format, args.force)
        elif args.command == "hessian":
            report = pipeline.hessian(loaded, args.at)
        elif args.command == "third-law":
            report = pipeline.third_law(loaded, args.ray)
        elif args.command == "leaf":
            report = pipeline.leaf(loaded, args.s_value, args.params)
        elif args.command == "gibbs-duhem":
            report = pipeline.gibbs_duhem(loaded, args.start, args.end)
    except EvaluationError as e:
        print(f"✗ Numeric failure: {str(e)}", file=sys.stderr)
        return EXIT_NUMERIC_FAILURE
    except (ModelValidationError, ExpressionError, UsageError) as e:
        print(f"✗ Invalid input: {str(e)}", file=sys.stderr)
        return EXIT_INVALID_INPUT
    except (NotIntegrableError, NoSolutionError) as e:
        print(f"✗ Refused: {str(e)}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    except ThermoFormError as e:
        print(f"✗ Numeric failure: {str(e)}", file=sys.stderr)
        return EXIT_NUMERIC_FAILURE
    except KeyboardInterrupt:
        print("\n\nInterrupted by user", file=sys.stderr)
        return 130

    if args.json:
        sys.stdout.write(report.to_json())
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
