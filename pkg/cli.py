#!/usr/bin/env python3
"""
cinf-lift - Command Runner

Runs one command against an algebra file (and optionally a structure file)
and collects a RunResult: the structured results that go into the JSON
report and the rich tables shown on the terminal.

Exit codes: 0 pass, 1 domain finding, 2 input error, 3 internal invariant
violation.
"""

import logging
import random
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

from rich.table import Table

from config import Settings, active_settings
from errors import CinfLiftError, InputError, InternalInvariantError
from forms_geometry import cartan_residuals, random_form
from formats import build_report, parse_algebra, parse_structure
from graded_core import Algebra, validate_frobenius
from harrison import FLAVORS, cohomology_table, degree_window, map_I, window_alphabet
from lie_calculus import Alphabet, CnStructure, exp_vector_field, product_derivation, random_derivation
from obstruction_lift import (check_cn, check_invariance, check_unital_shape, extend_structure,
                              lift_morphism_to_symplectic, lift_to_symplectic, obs_structure, synthetic_morphism,
                              synthetic_structure, working_alphabet)

logger = logging.getLogger(__name__)

EXIT_PASS, EXIT_FINDING = 0, 1
STATUS = {0: "pass", 1: "finding", 2: "input-error", 3: "internal-error"}


@dataclass
class RunResult:
    """Result of running one command."""
    command: str
    exit_code: int = EXIT_PASS
    results: Dict[str, Any] = field(default_factory=dict)
    tables: List[Table] = field(default_factory=list)
    summary: str = ""
    error: Optional[CinfLiftError] = None

    @property
    def status(self) -> str:
        return STATUS[self.exit_code]

    @property
    def success(self) -> bool:
        return self.exit_code == EXIT_PASS

    def report(self) -> dict:
        results = self.results
        if self.error is not None:
            results = dict(results, error=self.error.to_dict())
        return build_report(self.command, self.status, self.exit_code, results)


def parse_window(text: str) -> List[int]:
    """Orders from "3", "1-4" or "1,2,5"."""
    orders = set()
    try:
        for chunk in text.split(","):
            chunk = chunk.strip()
            if "-" in chunk:
                lo, hi = chunk.split("-", 1)
                orders.update(range(int(lo), int(hi) + 1))
            elif chunk:
                orders.add(int(chunk))
    except ValueError:
        raise InputError(f"bad order window {text!r}; use forms like 3, 1-4 or 1,2,5")
    if not orders or min(orders) < 0:
        raise InputError(f"bad order window {text!r}")
    return sorted(orders)


def _table(title: str, columns: Sequence[str], rows: Sequence[Sequence[Any]]) -> Table:
    table = Table(title=title, title_justify="left")
    for name in columns:
        table.add_column(name)
    for row in rows:
        table.add_row(*[str(cell) for cell in row])
    return table


def _residual_rows(residuals: Dict[str, str]) -> List[List[str]]:
    return [[name, value] for name, value in residuals.items()]


class CommandRunner:
    """Executes the engine commands and turns their outcomes into RunResults."""

    COMMANDS = ("check", "cohomology", "obstruction", "extend", "lift", "lift-morphism",
                "verify-I", "verify-cartan")

    def __init__(self, settings: Optional[Settings] = None):
        self.settings = settings or active_settings()

    def run(self, command: str, **options) -> RunResult:
        """
        Run a command, converting engine errors into an error RunResult.

        Args:
            command: One of COMMANDS
            **options: Keyword arguments of the command's method

        Returns:
            RunResult with exit code and structured results
        """
        if command not in self.COMMANDS:
            raise InputError(f"unknown command {command!r}")
        handler = getattr(self, command.replace("-", "_").lower())
        try:
            result = handler(**options)
        except CinfLiftError as e:
            logger.debug("%s failed: %s", command, e.message)
            result = RunResult(command, e.exit_code, summary=e.message, error=e)
        logger.info("%s finished with status %s", command, result.status)
        return result

    # --- loading ---------------------------------------------------------

    def _algebra(self, path) -> Algebra:
        return parse_algebra(path)

    def _structure(self, path, algebra: Algebra, truncation: Optional[int] = None,
                   validate: bool = True) -> CnStructure:
        if path is None:
            alphabet = working_alphabet(algebra, max(truncation or 0, 4))
            return CnStructure(product_derivation(algebra, alphabet), 3)
        return parse_structure(path, algebra, truncation, validate)

    def _at_level(self, structure: CnStructure, level: Optional[int]) -> CnStructure:
        if level is None:
            return structure
        if level < 3:
            raise InputError(f"level must be at least 3, got {level}")
        return CnStructure(structure.m.truncated(level - 1), level, structure.unital)

    def _rng(self, seed: Optional[int]) -> random.Random:
        return random.Random(self.settings.seed if seed is None else seed)

    # --- commands --------------------------------------------------------

    def check(self, algebra_path, structure_path=None) -> RunResult:
        """Validate the algebra and, when given, a structure: check_cn and cyclic invariance."""
        algebra = parse_algebra(algebra_path, validate=False)
        frobenius = validate_frobenius(algebra.product, algebra.pairing)
        result = RunResult("check")
        result.results["algebra"] = {"name": algebra.name, "rank": algebra.basis.rank,
                                     "has_pairing": algebra.pairing is not None,
                                     "frobenius": frobenius.to_dict()}
        rows = [["frobenius axioms", "ok" if frobenius.valid else str(frobenius.first)]]
        if not frobenius.valid:
            result.exit_code = EXIT_FINDING
        elif structure_path is not None:
            structure = parse_structure(structure_path, algebra, validate=False)
            residual = check_cn(structure, algebra=algebra)
            data = {"level": structure.level, "cn_residual": "0" if residual.is_zero() else residual.format()}
            rows.append([f"C_{structure.level} condition", data["cn_residual"]])
            if not residual.is_zero():
                result.exit_code = EXIT_FINDING
            if algebra.pairing is not None:
                invariance = check_invariance(algebra, structure.m)
                data["invariance"] = invariance.to_dict()
                rows.append(["cyclic invariance", "ok" if invariance.holds else
                             f"fails in order {invariance.violation[0]} at {invariance.violation[1]}"])
                if not invariance.holds:
                    result.exit_code = EXIT_FINDING
            if algebra.basis.is_unital:
                shape = check_unital_shape(structure.m, algebra)
                data["unital_shape"] = shape
                rows.append(["unital shape", "ok" if not shape else "; ".join(shape)])
            result.results["structure"] = data
        result.tables.append(_table(f"check {algebra.name}", ["property", "value"], rows))
        result.summary = "all checks pass" if result.success else "some checks fail"
        return result

    def cohomology(self, algebra_path, flavor: str = "harrison", window: str = "1-4",
                   normalised: bool = False) -> RunResult:
        """Cohomology of every block in the window, next to the dense oracle's dimensions."""
        if flavor not in FLAVORS:
            raise InputError(f"unknown flavor {flavor!r}; expected one of {FLAVORS}")
        algebra = self._algebra(algebra_path)
        reports = cohomology_table(algebra, flavor, parse_window(window), normalised, oracle=True)
        mismatches = [r.bidegree for r in reports if r.dense_dimension != r.dimension]
        if mismatches:
            raise InternalInvariantError("sparse and dense cohomology dimensions differ", witness=mismatches)
        result = RunResult("cohomology")
        result.results = {"flavor": flavor, "normalised": normalised, "blocks": [r.to_dict() for r in reports]}
        rows = [[f"({r.bidegree[0]}, {r.bidegree[1]})", r.block_size, r.cocycle_dimension,
                 r.coboundary_dimension, r.dimension, r.dense_dimension] for r in reports]
        title = f"{'normalised ' if normalised else ''}{flavor} cohomology of {algebra.name}"
        result.tables.append(_table(title, ["bidegree", "size", "cocycles", "coboundaries", "H", "dense H"], rows))
        result.summary = f"{len(reports)} blocks, total dimension {sum(r.dimension for r in reports)}"
        return result

    def obstruction(self, algebra_path, structure_path=None, level: Optional[int] = None,
                    flavor: str = "plain") -> RunResult:
        algebra = self._algebra(algebra_path)
        structure = self._at_level(self._structure(structure_path, algebra), level)
        obstruction = obs_structure(structure, algebra, flavor)
        result = RunResult("obstruction", EXIT_PASS if obstruction.is_zero else EXIT_FINDING)
        result.results = obstruction.to_dict()
        result.tables.append(_table(f"obstruction at level {structure.level} ({flavor})", ["field", "value"],
                                    [["bidegree", tuple(obstruction.bidegree)],
                                     ["representative", result.results["representative"] or "0"],
                                     ["class", "zero" if obstruction.is_zero else "nonzero"],
                                     ["cohomology dimension", obstruction.report.dimension]]))
        result.summary = "extends" if obstruction.is_zero else "obstructed"
        return result

    def extend(self, algebra_path, structure_path=None, level: Optional[int] = None,
               flavor: str = "plain") -> RunResult:
        algebra = self._algebra(algebra_path)
        structure = self._at_level(self._structure(structure_path, algebra), level)
        extension = extend_structure(structure, algebra, flavor)
        result = RunResult("extend", EXIT_PASS if extension.success else EXIT_FINDING)
        result.results = extension.to_dict()
        rows = [["level", structure.level], ["success", extension.success],
                ["solution dimension", extension.solution_dimension]]
        if extension.part is not None:
            rows.append([f"m_{structure.level}", extension.part.format() or "0"])
        result.tables.append(_table(f"extension ({flavor})", ["field", "value"], rows))
        result.summary = f"extended to level {structure.level + 1}" if extension.success else "obstructed"
        return result

    def lift(self, algebra_path, order: Optional[int] = None, structure_path=None, synthetic: bool = False,
             seed: Optional[int] = None, unital: bool = False, two_step_crosscheck: bool = False) -> RunResult:
        """Lift a structure (file, seeded synthetic, or m_2) to a symplectic one through `order`."""
        N = order or self.settings.default_order
        algebra = self._algebra(algebra_path)
        if structure_path is not None:
            m = parse_structure(structure_path, algebra, N + 1).m
        elif synthetic:
            m = synthetic_structure(algebra, N + 1, self._rng(seed), unital=unital)
        else:
            m = product_derivation(algebra, working_alphabet(algebra, N + 1))
        lifted = lift_to_symplectic(m, algebra, N, unital=unital)
        result = RunResult("lift")
        result.results = {"lift": lifted.to_dict()}
        result.tables.append(_table(f"lift of {algebra.name} through order {N}", ["residual", "value"],
                                    _residual_rows(lifted.residuals)))
        result.tables.append(_table("stages", ["order", "unknowns", "equations", "rank"],
                                    [[s.order, s.unknowns, s.equations, s.rank] for s in lifted.stages]))
        if two_step_crosscheck:
            other = lift_to_symplectic(m, algebra, N, unital=unital, two_step=True)
            result.results["two_step"] = other.to_dict()
            result.tables.append(_table("two-step crosscheck", ["residual", "value"],
                                        _residual_rows(other.residuals)))
        result.summary = f"symplectic lift through order {N}"
        return result

    def lift_morphism(self, algebra_path, order: Optional[int] = None, structure_path=None,
                      seed: Optional[int] = None, unital: bool = False) -> RunResult:
        """Lift a seeded morphism between symplectic lifts of m and a conjugate of m."""
        N = order or self.settings.default_order
        algebra = self._algebra(algebra_path)
        m = None
        if structure_path is not None:
            m = parse_structure(structure_path, algebra, N + 1).m
        morphism, source, target = synthetic_morphism(algebra, N, self._rng(seed), m, unital)
        lifted = lift_morphism_to_symplectic(morphism, source, target, algebra, N, unital)
        result = RunResult("lift-morphism")
        result.results = {"morphism": morphism.format(), "lift": lifted.to_dict()}
        result.tables.append(_table(f"morphism lift through order {N}", ["residual", "value"],
                                    _residual_rows(lifted.residuals)))
        result.summary = f"symplectic morphism with {len(lifted.witnesses)} homotopy witnesses"
        return result

    def verify_i(self, algebra_path, window: str = "1-4", normalised: bool = False) -> RunResult:
        """Ranks of I: HC^{i+1,j} -> H^{i,j}(A, A*) on every bidegree of the window."""
        algebra = self._algebra(algebra_path)
        orders = [i for i in parse_window(window) if i >= 1]
        alphabet = window_alphabet(algebra, max(orders) + 2)
        reports = []
        for i in orders:
            degrees = sorted(set(degree_window(alphabet, "dual", i)) | set(degree_window(alphabet, "cyclic", i + 1)))
            for j in degrees:
                report = map_I(algebra, i, j, normalised, check=False, alphabet=alphabet)
                if report.cyclic_dimension or report.dual_dimension:
                    reports.append(report)
        failures = [r for r in reports if not (r.holds and r.commutes)]
        result = RunResult("verify-I", 3 if failures else EXIT_PASS)
        result.results = {"normalised": normalised, "maps": [r.to_dict() for r in reports]}
        rows = [[f"({r.order}, {r.j})", r.cyclic_dimension, r.dual_dimension, r.induced_rank,
                 r.expected, "yes" if r.holds and r.commutes else "NO"] for r in reports]
        result.tables.append(_table(f"map I on {algebra.name}", ["bidegree", "HC", "H", "rank", "expected", "holds"],
                                    rows))
        if failures:
            result.error = InternalInvariantError(f"map I fails on {len(failures)} bidegree(s)",
                                                  witness=[(r.order, r.j) for r in failures])
            result.summary = result.error.message
        else:
            result.summary = f"map I behaves as expected on {len(reports)} bidegree(s)"
        return result

    def verify_cartan(self, algebra_path, samples: int = 200, seed: Optional[int] = None,
                      max_order: int = 4) -> RunResult:
        """Check the Cartan identities on seeded random vector fields, diffeomorphisms and forms."""
        if samples < 1 or max_order < 2:
            raise InputError("need at least one sample and max order >= 2")
        algebra = self._algebra(algebra_path)
        alphabet = Alphabet.from_basis(algebra.basis, max_order)
        rng = self._rng(seed)
        counts: Dict[str, int] = {}
        failures = []
        for sample in range(samples):
            xi = random_derivation(alphabet, rng.randint(-1, 1), range(1, max_order), rng)
            gamma = random_derivation(alphabet, rng.randint(-1, 1), range(1, max_order), rng)
            flow = exp_vector_field(random_derivation(alphabet, 0, (2, 3), rng))
            form_degree = rng.randint(0, 2)
            alpha = random_form(alphabet, form_degree, rng.randint(max(form_degree, 1), max_order), rng)
            for name, residual in cartan_residuals(xi, gamma, flow, alpha).items():
                counts.setdefault(name, 0)
                if residual.is_zero():
                    counts[name] += 1
                else:
                    failures.append({"sample": sample, "identity": name, "residual": residual.format()})
        result = RunResult("verify-cartan", 3 if failures else EXIT_PASS)
        result.results = {"samples": samples, "max_order": max_order, "passed": counts, "failures": failures}
        result.tables.append(_table(f"Cartan identities, {samples} samples", ["identity", "passed"],
                                    [[name, f"{n}/{samples}"] for name, n in counts.items()]))
        if failures:
            result.error = InternalInvariantError(f"{len(failures)} Cartan identity failure(s)",
                                                  witness=failures[0])
            result.summary = result.error.message
        else:
            result.summary = "all identities hold"
        return result
