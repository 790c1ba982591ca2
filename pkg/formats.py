#!/usr/bin/env python3
"""
cinf-lift - File Formats

Readers for algebra files (JSON) and structure files (text), and the
writer of structured reports.

Algebra file:

    {"schema": "cinf-lift-algebra/1",
     "name": "H*(S^2)",
     "basis": [{"name": "1", "degree": 0, "unit": true}, {"name": "x", "degree": 2}],
     "product": [{"left": "x", "right": "1", "result": {"x": "1"}}, ...],
     "pairing": {"degree": 2, "entries": [{"left": "1", "right": "x", "value": "1"}, ...]}}

Structure file, one part per line:

    # m_3 on t_x
    m3 t_x = "1/2" * [t_x, [t_x, tau]] - [tau, [t_x, t_x]]
"""

import json
import logging
import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Tuple

from errors import DegreeError, InputError, ParseError, ValidationError
from graded_core import (Algebra, GradedBasis, Pairing, StructureConstants, format_scalar,
                         require_frobenius, to_scalar)
from lie_calculus import Alphabet, CnStructure, Derivation, TensorElement, bracket, product_derivation
from obstruction_lift import check_cn

logger = logging.getLogger(__name__)

ALGEBRA_SCHEMA = "cinf-lift-algebra/1"
REPORT_SCHEMA = "cinf-lift-report/1"


# --- algebra files ----------------------------------------------------------

def _read_text(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}")


def _field(data: dict, key: str, where: str, path: str, kind=None):
    if not isinstance(data, dict) or key not in data:
        raise ParseError(f"{where}: missing field {key!r}", path=path)
    value = data[key]
    if kind is not None and not isinstance(value, kind):
        raise ParseError(f"{where}.{key}: expected {kind.__name__}", path=path)
    return value


def _rational(value, where: str, path: str) -> Fraction:
    if isinstance(value, float):
        raise ParseError(f"{where}: write rationals as \"p/q\" strings, not floats", path=path)
    try:
        return to_scalar(value)
    except InputError:
        raise ParseError(f"{where}: not a rational number: {value!r}", path=path)


def algebra_from_dict(data: Any, path: str = "<input>", validate: bool = True) -> Algebra:
    """
    Build an Algebra from the decoded JSON of an algebra file.

    Args:
        data: Decoded JSON document
        path: Shown in error messages
        validate: Run the algebra and Frobenius axioms (ValidationError on failure)

    Returns:
        The Algebra, with a Pairing when the document has one
    """
    if not isinstance(data, dict):
        raise ParseError("top level must be an object", path=path)
    schema = data.get("schema")
    if schema != ALGEBRA_SCHEMA:
        raise ParseError(f"unsupported schema {schema!r}; expected {ALGEBRA_SCHEMA!r}", path=path)

    entries = _field(data, "basis", "algebra", path, list)
    elements, unit = [], None
    for k, entry in enumerate(entries):
        where = f"basis[{k}]"
        name = _field(entry, "name", where, path, str)
        degree = _field(entry, "degree", where, path, int)
        if isinstance(degree, bool):
            raise ParseError(f"{where}.degree: expected int", path=path)
        if entry.get("unit", False):
            if unit is not None:
                raise ParseError(f"{where}: a second unit", path=path)
            unit = k
        elements.append((name, degree))
    try:
        basis = GradedBasis(tuple(elements), unit)
    except InputError as e:
        raise ParseError(e.message, path=path)

    def index(name, where):
        if name not in basis.names:
            raise ParseError(f"{where}: unknown basis element {name!r}", path=path)
        return basis.names.index(name)

    table: Dict[Tuple[int, int], Dict[int, Fraction]] = {}
    for k, entry in enumerate(_field(data, "product", "algebra", path, list)):
        where = f"product[{k}]"
        i = index(_field(entry, "left", where, path, str), where)
        j = index(_field(entry, "right", where, path, str), where)
        if (i, j) in table:
            raise ParseError(f"{where}: product {basis.names[i]}*{basis.names[j]} given twice", path=path)
        row = {}
        for name, value in _field(entry, "result", where, path, dict).items():
            c = _rational(value, f"{where}.result.{name}", path)
            if c:
                row[index(name, where)] = c
        table[(i, j)] = row
    product = StructureConstants(basis, {key: row for key, row in table.items() if row})

    pairing = None
    if data.get("pairing") is not None:
        section = data["pairing"]
        degree = _field(section, "degree", "pairing", path, int)
        matrix = [[Fraction(0)] * basis.rank for _ in range(basis.rank)]
        for k, entry in enumerate(_field(section, "entries", "pairing", path, list)):
            where = f"pairing.entries[{k}]"
            i = index(_field(entry, "left", where, path, str), where)
            j = index(_field(entry, "right", where, path, str), where)
            matrix[i][j] = _rational(_field(entry, "value", where, path), f"{where}.value", path)
        pairing = Pairing(tuple(tuple(row) for row in matrix), degree)

    algebra = Algebra(basis, product, pairing, name=str(data.get("name") or Path(path).stem))
    if validate:
        require_frobenius(algebra)
    logger.debug("algebra %s: rank %d, %d products", algebra.name, basis.rank, len(product.table))
    return algebra


def parse_algebra(path, validate: bool = True) -> Algebra:
    """Read and validate an algebra file."""
    text = _read_text(path)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, e.lineno, e.colno, str(path))
    return algebra_from_dict(data, str(path), validate)


def algebra_to_dict(algebra: Algebra) -> dict:
    """The algebra file document of an Algebra."""
    basis = algebra.basis
    names = basis.names
    data = {
        "schema": ALGEBRA_SCHEMA,
        "name": algebra.name,
        "basis": [dict({"name": n, "degree": d}, **({"unit": True} if i == basis.unit_index else {}))
                  for i, (n, d) in enumerate(basis.elements)],
        "product": [{"left": names[i], "right": names[j],
                     "result": {names[k]: format_scalar(c) for k, c in sorted(row.items())}}
                    for (i, j), row in sorted(algebra.product.table.items())],
    }
    if algebra.pairing is not None:
        data["pairing"] = {
            "degree": algebra.pairing.degree,
            "entries": [{"left": names[i], "right": names[j], "value": format_scalar(v)}
                        for i, row in enumerate(algebra.pairing.matrix)
                        for j, v in enumerate(row) if v],
        }
    return data


# --- structure files --------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<space>\s+)
  | (?P<string>"[^"\n]*")
  | (?P<int>\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_^]*)
  | (?P<punct>[\[\],*+\-=])
""", re.VERBOSE)

_PART = re.compile(r"m(\d+)$")


@dataclass
class Token:
    kind: str
    text: str
    column: int


def _tokenize(text: str, line: int, path: str) -> List[Token]:
    tokens, pos = [], 0
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if match is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos + 1, path)
        if match.lastgroup != "space":
            tokens.append(Token(match.lastgroup, match.group(), pos + 1))
        pos = match.end()
    return tokens


class _LineParser:
    """Recursive descent over the tokens of one `m<order> <generator> = <expr>` line."""

    def __init__(self, tokens: List[Token], line: int, path: str, alphabet: Alphabet):
        self.tokens = tokens
        self.pos = 0
        self.line = line
        self.path = path
        self.alphabet = alphabet
        self.end = tokens[-1].column + len(tokens[-1].text) if tokens else 1

    def error(self, message: str, token: Optional[Token] = None, kind=ParseError):
        column = token.column if token is not None else self.end
        raise kind(message, self.line, column, self.path)

    def peek(self) -> Optional[Token]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self, kind: str, text: Optional[str] = None) -> Token:
        token = self.peek()
        if token is None or token.kind != kind or (text is not None and token.text != text):
            wanted = repr(text) if text else kind
            found = repr(token.text) if token else "end of line"
            self.error(f"expected {wanted}, found {found}", token)
        self.pos += 1
        return token

    def at(self, text: str) -> bool:
        token = self.peek()
        return token is not None and token.kind == "punct" and token.text == text

    def header(self) -> Tuple[int, int, Token]:
        token = self.take("name")
        match = _PART.match(token.text)
        if match is None:
            self.error(f"expected a part name like m3, found {token.text!r}", token)
        order = int(match.group(1))
        target = self.take("name")
        if target.text not in self.alphabet.names:
            self.error(f"unknown generator {target.text!r}", target)
        self.take("punct", "=")
        return order, self.alphabet.names.index(target.text), token

    def expression(self) -> List[Tuple[Fraction, TensorElement, int, int, Token]]:
        terms = [self.term(Fraction(1))]
        while self.at("+") or self.at("-"):
            factor = Fraction(1) if self.take("punct").text == "+" else Fraction(-1)
            terms.append(self.term(factor))
        if self.peek() is not None:
            self.error(f"unexpected {self.peek().text!r}", self.peek())
        return terms

    def term(self, factor: Fraction) -> Tuple[Fraction, TensorElement, int, int, Token]:
        while self.at("-") or self.at("+"):
            if self.take("punct").text == "-":
                factor = -factor
        start = self.peek()
        if start is not None and start.kind in ("string", "int"):
            self.pos += 1
            try:
                factor *= to_scalar(start.text.strip('"'))
            except InputError:
                self.error(f"not a rational number: {start.text}", start)
            self.take("punct", "*")
        start = self.peek()
        element, leaves, degree = self.bracket()
        return factor, element, leaves, degree, start

    def bracket(self) -> Tuple[TensorElement, int, int]:
        """A bracket expression with its number of leaves and its degree."""
        if self.at("["):
            self.take("punct", "[")
            left, n, a = self.bracket()
            self.take("punct", ",")
            right, k, b = self.bracket()
            self.take("punct", "]")
            return bracket(left, right, strict=False), n + k, a + b
        token = self.take("name")
        if token.text not in self.alphabet.names:
            self.error(f"unknown generator {token.text!r}", token)
        g = self.alphabet.names.index(token.text)
        return TensorElement.generator(self.alphabet, g), 1, self.alphabet.degrees[g]


def _logical_lines(text: str) -> Iterator[Tuple[int, str]]:
    for number, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0]
        if content.strip():
            yield number, content


def structure_from_text(text: str, algebra: Algebra, truncation: Optional[int] = None,
                        path: str = "<input>", validate: bool = True) -> CnStructure:
    """
    Parse structure lines into a CnStructure m_2 + m_3 + ... of level max order + 1.

    m2 lines are optional; when present they must reproduce the product of
    the algebra. An empty file yields the C_3-structure m_2.

    Args:
        text: Contents of the structure file
        algebra: Algebra supplying the generators and m_2
        truncation: Word length of the returned alphabet (default: level + 1)
        path: Shown in error messages
        validate: Require 1/2 [m, m] = 0 through the level (ValidationError otherwise)
    """
    parsed = []
    header_alphabet = Alphabet.from_basis(algebra.basis, 1)
    for number, content in _logical_lines(text):
        parser = _LineParser(_tokenize(content, number, path), number, path, header_alphabet)
        parsed.append((number, content, parser.header()[0]))
    level = max([3] + [order + 1 for _, _, order in parsed])
    alphabet = Alphabet.from_basis(algebra.basis, max(truncation or 0, level + 1))

    parts: Dict[int, Dict[int, TensorElement]] = {}
    for number, content, _ in parsed:
        parser = _LineParser(_tokenize(content, number, path), number, path, alphabet)
        order, g, head = parser.header()
        if order < 2:
            parser.error(f"part m{order} has order below 2", head, DegreeError)
        expected = alphabet.degrees[g] + 1
        for factor, element, leaves, degree, token in parser.expression():
            if leaves != order:
                parser.error(f"term of order {leaves} in m{order}", token, DegreeError)
            if degree != expected:
                parser.error(f"term of degree {degree} in the image of {alphabet.names[g]}, "
                             f"expected {expected}", token, DegreeError)
            images = parts.setdefault(order, {})
            images[g] = images.get(g, TensorElement.zero(alphabet)) + element.scaled(factor)

    m2 = product_derivation(algebra, alphabet)
    m = Derivation.zero(alphabet, 1)
    for order, images in sorted(parts.items()):
        m = m + Derivation(alphabet, 1, images)
    if 2 in parts:
        if m.order_part(2) != m2:
            raise ValidationError(f"{path}: m2 does not match the product of {algebra.name}")
    else:
        m = m + m2
    structure = CnStructure(m, level)
    if validate:
        residual = check_cn(structure, algebra=algebra)
        if not residual.is_zero():
            raise ValidationError(f"{path}: not a C_{level}-structure; residual in orders "
                                  f"{residual.orders()}", witness=residual.format())
    logger.debug("structure %s: level %d, parts %s", path, level, sorted(parts))
    return structure


def parse_structure(path, algebra: Algebra, truncation: Optional[int] = None,
                    validate: bool = True) -> CnStructure:
    """Read a structure file; see structure_from_text."""
    return structure_from_text(_read_text(path), algebra, truncation, str(path), validate)


# --- reports ----------------------------------------------------------------

def plain(value: Any) -> Any:
    """JSON-ready copy: rationals become "p/q" strings, tuples lists, objects their to_dict()."""
    if isinstance(value, bool) or value is None or isinstance(value, (str, int)):
        return value
    if isinstance(value, Fraction):
        return format_scalar(value)
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if hasattr(value, "to_dict"):
        return plain(value.to_dict())
    if hasattr(value, "format"):
        return value.format()
    return str(value)


def build_report(command: str, status: str, exit_code: int, results: Any) -> dict:
    return {"schema": REPORT_SCHEMA, "command": command, "status": status,
            "exit_code": exit_code, "results": plain(results)}


def render_report(report: dict, indent: int = 2) -> str:
    """Deterministic JSON text: sorted keys, fixed indent, trailing newline."""
    return json.dumps(plain(report), sort_keys=True, indent=indent, ensure_ascii=False) + "\n"


def write_report(report: dict, path, indent: int = 2) -> None:
    try:
        Path(path).write_text(render_report(report, indent), encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot write report to {path}: {e.strerror}")
