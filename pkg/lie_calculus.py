#!/usr/bin/env python3
"""
cinf-lift - Lie Calculus

The truncated free graded Lie algebra on the generators g_i, realised inside
the tensor algebra. Lie elements are tensor expansions; membership and bases
come from the Dynkin projector. Derivations (vector fields) are given by
generator images and pointed diffeomorphisms by g -> g + higher order terms.

Every operation is exact modulo words longer than the alphabet's truncation.
"""

import itertools
import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from errors import InputError, PreconditionError, TruncationError
from exact_linalg import echelon
from graded_core import Algebra, GradedBasis, format_scalar, sign

logger = logging.getLogger(__name__)

Word = Tuple[int, ...]

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class Alphabet:
    """Generators with their degrees and the truncation order N."""
    degrees: Tuple[int, ...]
    truncation: int
    names: Tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "degrees", tuple(int(d) for d in self.degrees))
        if not self.names:
            object.__setattr__(self, "names", tuple(f"g{i}" for i in range(len(self.degrees))))
        if len(self.names) != len(self.degrees):
            raise InputError("alphabet names and degrees differ in length")
        if self.truncation < 1:
            raise InputError(f"truncation must be at least 1, got {self.truncation}")

    @classmethod
    def from_basis(cls, basis: GradedBasis, truncation: int) -> "Alphabet":
        return cls(basis.generator_degrees, truncation, basis.generator_names())

    @property
    def rank(self) -> int:
        return len(self.degrees)

    def word_degree(self, word: Sequence[int]) -> int:
        return sum(self.degrees[i] for i in word)

    def with_truncation(self, truncation: int) -> "Alphabet":
        return Alphabet(self.degrees, truncation, self.names)

    def words(self, length: int, degree: Optional[int] = None,
              letters: Optional[Sequence[int]] = None) -> List[Word]:
        """All words of a given length (and degree) over `letters`, in lexicographic order."""
        pool = tuple(range(self.rank)) if letters is None else tuple(sorted(letters))
        result = []
        for word in itertools.product(pool, repeat=length):
            if degree is None or self.word_degree(word) == degree:
                result.append(word)
        return result

    def format_word(self, word: Sequence[int]) -> str:
        if not word:
            return "1"
        return "*".join(self.names[i] for i in word)


class TensorElement:
    """A rational combination of words in the generators; no zero coefficients stored."""

    __slots__ = ("alphabet", "terms")

    def __init__(self, alphabet: Alphabet, terms: Optional[Dict[Sequence[int], object]] = None):
        self.alphabet = alphabet
        self.terms: Dict[Word, Fraction] = {}
        for word, coeff in (terms or {}).items():
            coeff = Fraction(coeff)
            if coeff:
                self.terms[tuple(word)] = coeff

    @classmethod
    def _wrap(cls, alphabet: Alphabet, terms: Dict[Word, Fraction]) -> "TensorElement":
        element = cls.__new__(cls)
        element.alphabet = alphabet
        element.terms = terms
        return element

    @classmethod
    def zero(cls, alphabet: Alphabet) -> "TensorElement":
        return cls._wrap(alphabet, {})

    @classmethod
    def generator(cls, alphabet: Alphabet, index: int) -> "TensorElement":
        return cls._wrap(alphabet, {(index,): ONE})

    @classmethod
    def unit(cls, alphabet: Alphabet) -> "TensorElement":
        """The empty word; the constant 1 of the tensor algebra."""
        return cls._wrap(alphabet, {(): ONE})

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, word: Sequence[int]) -> Fraction:
        return self.terms.get(tuple(word), ZERO)

    def __eq__(self, other) -> bool:
        if isinstance(other, int) and other == 0:
            return not self.terms
        if not isinstance(other, TensorElement):
            return NotImplemented
        return self.terms == other.terms

    __hash__ = None

    def __add__(self, other: "TensorElement") -> "TensorElement":
        terms = dict(self.terms)
        _accumulate(terms, other.terms, ONE)
        return TensorElement._wrap(self.alphabet, terms)

    def __sub__(self, other: "TensorElement") -> "TensorElement":
        terms = dict(self.terms)
        _accumulate(terms, other.terms, -ONE)
        return TensorElement._wrap(self.alphabet, terms)

    def __neg__(self) -> "TensorElement":
        return TensorElement._wrap(self.alphabet, {w: -c for w, c in self.terms.items()})

    def scaled(self, factor) -> "TensorElement":
        factor = Fraction(factor)
        if not factor:
            return TensorElement.zero(self.alphabet)
        return TensorElement._wrap(self.alphabet, {w: factor * c for w, c in self.terms.items()})

    def __mul__(self, factor) -> "TensorElement":
        if isinstance(factor, TensorElement):
            return self.tensor(factor)
        return self.scaled(factor)

    def __rmul__(self, factor) -> "TensorElement":
        return self.scaled(factor)

    def tensor(self, other: "TensorElement") -> "TensorElement":
        """Concatenation product, dropping words above the truncation."""
        limit = self.alphabet.truncation
        terms: Dict[Word, Fraction] = {}
        for u, a in self.terms.items():
            for v, b in other.terms.items():
                if len(u) + len(v) <= limit:
                    _add_term(terms, u + v, a * b)
        return TensorElement._wrap(self.alphabet, terms)

    def orders(self) -> List[int]:
        return sorted({len(w) for w in self.terms})

    @property
    def lowest_order(self) -> Optional[int]:
        return min((len(w) for w in self.terms), default=None)

    @property
    def highest_order(self) -> Optional[int]:
        return max((len(w) for w in self.terms), default=None)

    def order_part(self, order: int) -> "TensorElement":
        return TensorElement._wrap(self.alphabet, {w: c for w, c in self.terms.items() if len(w) == order})

    def truncated(self, order: int) -> "TensorElement":
        """Keep words of length at most `order`."""
        return TensorElement._wrap(self.alphabet, {w: c for w, c in self.terms.items() if len(w) <= order})

    def degrees(self) -> List[int]:
        return sorted({self.alphabet.word_degree(w) for w in self.terms})

    @property
    def degree(self) -> Optional[int]:
        """Internal degree, or None for zero; raises for inhomogeneous elements."""
        found = self.degrees()
        if not found:
            return None
        if len(found) > 1:
            raise InputError(f"element is not degree homogeneous: degrees {found}")
        return found[0]

    def is_homogeneous(self) -> bool:
        return len(self.degrees()) <= 1

    def letters(self) -> set:
        return {i for w in self.terms for i in w}

    def format(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for word in sorted(self.terms, key=lambda w: (len(w), w)):
            parts.append(f"{format_scalar(self.terms[word])}*{self.alphabet.format_word(word)}")
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"TensorElement({self.format()})"


def _add_term(terms: Dict[Word, Fraction], word: Word, coeff: Fraction) -> None:
    value = terms.get(word, ZERO) + coeff
    if value:
        terms[word] = value
    else:
        terms.pop(word, None)


def _accumulate(terms: Dict[Word, Fraction], other: Dict[Word, Fraction], factor: Fraction) -> None:
    for word, coeff in other.items():
        _add_term(terms, word, factor * coeff)


def _bracket_terms(alphabet: Alphabet, a: Dict[Word, Fraction], b: Dict[Word, Fraction]) -> Dict[Word, Fraction]:
    limit = alphabet.truncation
    degrees = alphabet.degrees
    terms: Dict[Word, Fraction] = {}
    for u, x in a.items():
        du = sum(degrees[i] for i in u)
        for v, y in b.items():
            if len(u) + len(v) > limit:
                continue
            dv = sum(degrees[i] for i in v)
            _add_term(terms, u + v, x * y)
            _add_term(terms, v + u, -sign(du * dv) * x * y)
    return terms


def bracket(a: TensorElement, b: TensorElement, strict: bool = True) -> TensorElement:
    """
    Graded commutator ab - (-1)^{|a||b|} ba.

    Args:
        a: Left argument
        b: Right argument
        strict: Raise TruncationError instead of dropping words above the truncation

    Returns:
        The bracket as a TensorElement
    """
    if strict and not a.is_zero() and not b.is_zero():
        if a.highest_order + b.highest_order > a.alphabet.truncation:
            raise TruncationError(
                f"bracket of orders {a.highest_order} and {b.highest_order} "
                f"exceeds truncation {a.alphabet.truncation}")
    return TensorElement._wrap(a.alphabet, _bracket_terms(a.alphabet, a.terms, b.terms))


@lru_cache(maxsize=None)
def _left_bracketing(word: Word, degrees: Tuple[int, ...]) -> Tuple[Tuple[Word, int], ...]:
    """Expansion of [[..[g_{i1}, g_{i2}], ..], g_{in}] in words."""
    current: Dict[Word, int] = {word[:1]: 1}
    current_degree = degrees[word[0]]
    for letter in word[1:]:
        s = sign(current_degree * degrees[letter])
        step: Dict[Word, int] = {}
        for u, c in current.items():
            for w, value in ((u + (letter,), c), ((letter,) + u, -s * c)):
                total = step.get(w, 0) + value
                if total:
                    step[w] = total
                else:
                    step.pop(w, None)
        current = step
        current_degree += degrees[letter]
    return tuple(current.items())


def dynkin_project(x: TensorElement) -> TensorElement:
    """
    Project onto Lie elements: each word of length n maps to its left bracketing over n.

    Raises InputError when x has a component of order 0.
    """
    terms: Dict[Word, Fraction] = {}
    degrees = x.alphabet.degrees
    for word, coeff in x.terms.items():
        if not word:
            raise InputError("dynkin projection is undefined in order 0")
        factor = coeff / len(word)
        for image, c in _left_bracketing(word, degrees):
            _add_term(terms, image, factor * c)
    return TensorElement._wrap(x.alphabet, terms)


def is_lie(x: TensorElement) -> bool:
    """True when every positive order part of x is a Lie element."""
    positive = TensorElement._wrap(x.alphabet, {w: c for w, c in x.terms.items() if w})
    return dynkin_project(positive) == positive


@dataclass(frozen=True)
class LieBasis:
    """Echelon basis of the Lie elements of one order and degree."""
    order: int
    degree: int
    letters: Optional[Tuple[int, ...]]
    elements: Tuple[TensorElement, ...]
    pivots: Tuple[Word, ...]

    def __len__(self) -> int:
        return len(self.elements)

    def coordinates(self, x: TensorElement) -> List[Fraction]:
        return [x.coefficient(p) for p in self.pivots]

    def combine(self, coordinates: Sequence) -> TensorElement:
        terms: Dict[Word, Fraction] = {}
        for element, c in zip(self.elements, coordinates):
            if c:
                _accumulate(terms, element.terms, Fraction(c))
        alphabet = self.elements[0].alphabet if self.elements else None
        return TensorElement._wrap(alphabet, terms)

    def contains(self, x: TensorElement) -> bool:
        if x.is_zero():
            return True
        if not self.elements:
            return False
        return self.combine(self.coordinates(x)) == x


@lru_cache(maxsize=None)
def lie_basis(alphabet: Alphabet, order: int, degree: int,
              letters: Optional[Tuple[int, ...]] = None) -> LieBasis:
    """
    Basis of the Lie elements of word length `order` and internal degree `degree`.

    Order 0 is the constants (nonzero only in degree 0). With `letters` the
    basis spans the Lie subalgebra generated by those letters.
    """
    if order < 0:
        raise InputError(f"order must be nonnegative, got {order}")
    if order == 0:
        if degree == 0:
            return LieBasis(0, 0, letters, (TensorElement.unit(alphabet),), ((),))
        return LieBasis(0, degree, letters, (), ())
    words = alphabet.words(order, degree, letters)
    column = {w: k for k, w in enumerate(words)}
    rows = []
    for word in words:
        row = {}
        for image, c in _left_bracketing(word, alphabet.degrees):
            row[column[image]] = Fraction(c, order)
        rows.append(row)
    form = echelon(rows, len(words), "first")
    elements = []
    pivots = []
    for col in form.pivots:
        row = form.pivot_rows[col]
        elements.append(TensorElement._wrap(alphabet, {words[j]: c for j, c in row.items()}))
        pivots.append(words[col])
    logger.debug("lie basis order=%d degree=%d letters=%s: %d of %d words",
                 order, degree, letters, len(elements), len(words))
    return LieBasis(order, degree, letters, tuple(elements), tuple(pivots))


class Derivation:
    """
    A vector field of fixed internal degree, given by its generator images.

    The order-i part sends each generator to words of length i; order 0 parts
    are constant vector fields.
    """

    __slots__ = ("alphabet", "degree", "images")

    def __init__(self, alphabet: Alphabet, degree: int,
                 images: Optional[Dict[int, TensorElement]] = None, check: bool = True):
        self.alphabet = alphabet
        self.degree = int(degree)
        self.images: Dict[int, TensorElement] = {}
        for g, image in (images or {}).items():
            if image.is_zero():
                continue
            if check:
                expected = alphabet.degrees[g] + self.degree
                found = image.degrees()
                if found != [expected]:
                    raise InputError(
                        f"image of {alphabet.names[g]} has degree {found}, expected {expected}")
                if not is_lie(image):
                    raise InputError(f"image of {alphabet.names[g]} is not a Lie element")
            self.images[g] = image

    @classmethod
    def zero(cls, alphabet: Alphabet, degree: int) -> "Derivation":
        return cls(alphabet, degree)

    @classmethod
    def euler(cls, alphabet: Alphabet) -> "Derivation":
        """E(g) = g for every generator."""
        return cls(alphabet, 0, {g: TensorElement.generator(alphabet, g) for g in range(alphabet.rank)})

    def image(self, g: int) -> TensorElement:
        return self.images.get(g) or TensorElement.zero(self.alphabet)

    def is_zero(self) -> bool:
        return not self.images

    def __eq__(self, other) -> bool:
        if isinstance(other, int) and other == 0:
            return not self.images
        if not isinstance(other, Derivation):
            return NotImplemented
        if self.is_zero() and other.is_zero():
            return True
        return self.degree == other.degree and self.images == other.images

    __hash__ = None

    def _combine(self, other: "Derivation", factor: Fraction) -> "Derivation":
        if other.is_zero():
            return self
        if self.is_zero():
            return other.scaled(factor)
        if other.degree != self.degree:
            raise InputError(f"cannot add derivations of degrees {self.degree} and {other.degree}")
        images = dict(self.images)
        for g, image in other.images.items():
            terms = dict(images[g].terms) if g in images else {}
            _accumulate(terms, image.terms, factor)
            images[g] = TensorElement._wrap(self.alphabet, terms)
        return Derivation(self.alphabet, self.degree, images, check=False)

    def __add__(self, other: "Derivation") -> "Derivation":
        return self._combine(other, ONE)

    def __sub__(self, other: "Derivation") -> "Derivation":
        return self._combine(other, -ONE)

    def __neg__(self) -> "Derivation":
        return self.scaled(-1)

    def scaled(self, factor) -> "Derivation":
        factor = Fraction(factor)
        return Derivation(self.alphabet, self.degree,
                          {g: im.scaled(factor) for g, im in self.images.items()}, check=False)

    def __mul__(self, factor) -> "Derivation":
        return self.scaled(factor)

    __rmul__ = __mul__

    def __call__(self, x: TensorElement) -> TensorElement:
        return apply_derivation(self, x)

    def orders(self) -> List[int]:
        return sorted({o for im in self.images.values() for o in im.orders()})

    @property
    def lowest_order(self) -> Optional[int]:
        return min(self.orders(), default=None)

    @property
    def highest_order(self) -> Optional[int]:
        return max(self.orders(), default=None)

    def order_part(self, order: int) -> "Derivation":
        return Derivation(self.alphabet, self.degree,
                          {g: im.order_part(order) for g, im in self.images.items()}, check=False)

    def order_range(self, lo: int, hi: int) -> "Derivation":
        """Parts of order lo..hi inclusive."""
        images = {g: TensorElement._wrap(self.alphabet, {w: c for w, c in im.terms.items() if lo <= len(w) <= hi})
                  for g, im in self.images.items()}
        return Derivation(self.alphabet, self.degree, images, check=False)

    def truncated(self, order: int) -> "Derivation":
        return self.order_range(0, order)

    def letters(self) -> set:
        return {i for im in self.images.values() for i in im.letters()}

    def is_lie(self) -> bool:
        return all(is_lie(im) for im in self.images.values())

    def with_alphabet(self, alphabet: Alphabet) -> "Derivation":
        """Same images over an alphabet with another truncation."""
        images = {g: TensorElement._wrap(alphabet, {w: c for w, c in im.terms.items()
                                                    if len(w) <= alphabet.truncation})
                  for g, im in self.images.items()}
        return Derivation(alphabet, self.degree, images, check=False)

    def format(self) -> str:
        if not self.images:
            return "0"
        return "; ".join(f"{self.alphabet.names[g]} -> {self.images[g].format()}" for g in sorted(self.images))

    def __repr__(self) -> str:
        return f"Derivation(degree={self.degree}, {self.format()})"


def apply_derivation(xi: Derivation, x: TensorElement) -> TensorElement:
    """Leibniz extension: xi(ab) = xi(a) b + (-1)^{|xi||a|} a xi(b)."""
    alphabet = x.alphabet
    limit = alphabet.truncation
    degrees = alphabet.degrees
    terms: Dict[Word, Fraction] = {}
    for word, coeff in x.terms.items():
        prefix_degree = 0
        for p, letter in enumerate(word):
            image = xi.images.get(letter)
            if image is not None:
                factor = coeff * sign(xi.degree * prefix_degree)
                head, tail = word[:p], word[p + 1:]
                rest = len(word) - 1
                for u, a in image.terms.items():
                    if rest + len(u) <= limit:
                        _add_term(terms, head + u + tail, factor * a)
            prefix_degree += degrees[letter]
    return TensorElement._wrap(alphabet, terms)


def derivation_bracket(xi: Derivation, gamma: Derivation) -> Derivation:
    """
    [xi, gamma] = xi gamma - (-1)^{|xi||gamma|} gamma xi, on generator images.

    Words above the truncation are dropped silently.
    """
    alphabet = xi.alphabet
    degree = xi.degree + gamma.degree
    s = sign(xi.degree * gamma.degree)
    images = {}
    for g in range(alphabet.rank):
        terms = dict(apply_derivation(xi, gamma.image(g)).terms)
        _accumulate(terms, apply_derivation(gamma, xi.image(g)).terms, Fraction(-s))
        if terms:
            images[g] = TensorElement._wrap(alphabet, terms)
    return Derivation(alphabet, degree, images, check=False)


class PointedDiffeo:
    """An algebra map g -> g + (higher order terms); missing images are identity."""

    __slots__ = ("alphabet", "images")

    def __init__(self, alphabet: Alphabet, images: Optional[Dict[int, TensorElement]] = None,
                 check: bool = True):
        self.alphabet = alphabet
        self.images: Dict[int, TensorElement] = {}
        for g, image in (images or {}).items():
            if check:
                linear = image.order_part(1)
                if image.order_part(0).terms or linear != TensorElement.generator(alphabet, g):
                    raise PreconditionError(
                        f"not pointed: linear part of {alphabet.names[g]} is {linear.format()}")
                if image.degrees() != [alphabet.degrees[g]]:
                    raise InputError(f"image of {alphabet.names[g]} is not of degree {alphabet.degrees[g]}")
            if image != TensorElement.generator(alphabet, g):
                self.images[g] = image

    @classmethod
    def identity(cls, alphabet: Alphabet) -> "PointedDiffeo":
        return cls(alphabet)

    def image(self, g: int) -> TensorElement:
        return self.images.get(g) or TensorElement.generator(self.alphabet, g)

    def higher_part(self, g: int) -> TensorElement:
        return self.image(g) - TensorElement.generator(self.alphabet, g)

    def order_part(self, order: int) -> Dict[int, TensorElement]:
        """The component phi_order, as generator images of word length `order`."""
        parts = {g: self.image(g).order_part(order) for g in range(self.alphabet.rank)}
        return {g: p for g, p in parts.items() if not p.is_zero()}

    def is_identity(self) -> bool:
        return not self.images

    def __eq__(self, other) -> bool:
        if not isinstance(other, PointedDiffeo):
            return NotImplemented
        return all(self.image(g) == other.image(g) for g in range(self.alphabet.rank))

    __hash__ = None

    def truncated(self, order: int) -> "PointedDiffeo":
        return PointedDiffeo(self.alphabet, {g: im.truncated(order) for g, im in self.images.items()},
                             check=False)

    def __call__(self, x: TensorElement) -> TensorElement:
        return self.apply(x)

    def apply(self, x: TensorElement) -> TensorElement:
        """Multiplicative extension to words."""
        alphabet = x.alphabet
        limit = alphabet.truncation
        terms: Dict[Word, Fraction] = {}
        for word, coeff in x.terms.items():
            current: Dict[Word, Fraction] = {(): coeff}
            for letter in word:
                image = self.images.get(letter)
                if image is None:
                    current = {u + (letter,): c for u, c in current.items() if len(u) < limit}
                    continue
                step: Dict[Word, Fraction] = {}
                for u, c in current.items():
                    for v, a in image.terms.items():
                        if len(u) + len(v) <= limit:
                            _add_term(step, u + v, c * a)
                current = step
            _accumulate(terms, current, ONE)
        return TensorElement._wrap(alphabet, terms)

    def format(self) -> str:
        if not self.images:
            return "id"
        return "; ".join(f"{self.alphabet.names[g]} -> {self.images[g].format()}" for g in sorted(self.images))

    def __repr__(self) -> str:
        return f"PointedDiffeo({self.format()})"


def compose(phi: PointedDiffeo, psi: PointedDiffeo) -> PointedDiffeo:
    """phi o psi, i.e. g -> phi(psi(g))."""
    images = {g: phi.apply(psi.image(g)) for g in range(phi.alphabet.rank)}
    return PointedDiffeo(phi.alphabet, images, check=False)


def exp_vector_field(gamma: Derivation, truncation: Optional[int] = None) -> PointedDiffeo:
    """
    exp(gamma) = sum gamma^k / k! on generators.

    Args:
        gamma: Degree 0 derivation with lowest order at least 2
        truncation: Optional lower truncation for the result

    Returns:
        The pointed diffeomorphism exp(gamma)
    """
    if gamma.is_zero():
        return PointedDiffeo.identity(gamma.alphabet)
    if gamma.degree != 0:
        raise InputError(f"exp needs a degree 0 vector field, got degree {gamma.degree}")
    if gamma.lowest_order < 2:
        raise InputError(f"exp needs lowest order >= 2, got {gamma.lowest_order}")
    alphabet = gamma.alphabet
    images = {}
    for g in range(alphabet.rank):
        term = TensorElement.generator(alphabet, g)
        total = term
        k = 1
        while True:
            term = apply_derivation(gamma, term).scaled(Fraction(1, k))
            if term.is_zero():
                break
            total = total + term
            k += 1
        images[g] = total
    phi = PointedDiffeo(alphabet, images, check=False)
    return phi.truncated(truncation) if truncation is not None else phi


def invert_pointed(phi: PointedDiffeo) -> PointedDiffeo:
    """Inverse modulo the truncation, by fixed point iteration psi <- psi - (phi psi - id)."""
    alphabet = phi.alphabet
    psi = PointedDiffeo.identity(alphabet)
    for _ in range(alphabet.truncation):
        images = {}
        done = True
        for g in range(alphabet.rank):
            current = psi.image(g)
            error = phi.apply(current) - TensorElement.generator(alphabet, g)
            if not error.is_zero():
                done = False
            images[g] = current - error
        if done:
            break
        psi = PointedDiffeo(alphabet, images, check=False)
    return psi


def conjugate(phi: PointedDiffeo, m: Derivation) -> Derivation:
    """phi o m o phi^{-1}."""
    inverse = invert_pointed(phi)
    images = {g: phi.apply(apply_derivation(m, inverse.image(g))) for g in range(m.alphabet.rank)}
    return Derivation(m.alphabet, m.degree, images, check=False)


def log_pointed(phi: PointedDiffeo) -> Derivation:
    """The degree 0 vector field gamma of lowest order >= 2 with exp(gamma) = phi."""
    alphabet = phi.alphabet
    gamma = Derivation.zero(alphabet, 0)
    for order in range(2, alphabet.truncation + 1):
        current = exp_vector_field(gamma)
        correction = {}
        for g in range(alphabet.rank):
            diff = (phi.image(g) - current.image(g)).order_part(order)
            if not diff.is_zero():
                correction[g] = diff
        if correction:
            gamma = gamma + Derivation(alphabet, 0, correction, check=False)
    return gamma


def bch(gamma: Derivation, other: Derivation) -> Derivation:
    """The vector field whose exponential is exp(gamma) o exp(other)."""
    return log_pointed(compose(exp_vector_field(gamma), exp_vector_field(other)))


@dataclass
class CnStructure:
    """A truncated structure m = m_2 + ... + m_{level-1} of degree 1."""
    m: Derivation
    level: int
    unital: bool = False
    symplectic_checked: bool = False

    def __post_init__(self):
        if self.level < 3:
            raise InputError(f"a structure needs level >= 3, got {self.level}")
        if not self.m.is_zero():
            if self.m.degree != 1:
                raise InputError(f"structure must have degree 1, got {self.m.degree}")
            if self.m.lowest_order < 2 or self.m.highest_order > self.level - 1:
                raise InputError(
                    f"structure parts must have orders 2..{self.level - 1}, found {self.m.orders()}")

    @property
    def alphabet(self) -> Alphabet:
        return self.m.alphabet

    def part(self, order: int) -> Derivation:
        return self.m.order_part(order)

    @property
    def parts(self) -> Dict[int, Derivation]:
        return {i: self.part(i) for i in range(2, self.level)}


def product_derivation(algebra: Algebra, alphabet: Alphabet) -> Derivation:
    """
    m_2 of a graded commutative product.

    m_2(g_k) = sum_{i,j} (-1)^{|x_i|} a^k_ij g_i g_j
    """
    deg = algebra.basis.degrees
    images: Dict[int, Dict[Word, Fraction]] = {}
    for (i, j), row in algebra.product.table.items():
        for k, c in row.items():
            _add_term(images.setdefault(k, {}), (i, j), sign(deg[i]) * c)
    return Derivation(alphabet, 1, {k: TensorElement._wrap(alphabet, t) for k, t in images.items() if t})


def random_lie_element(alphabet: Alphabet, order: int, degree: int, rng: random.Random,
                       letters: Optional[Tuple[int, ...]] = None, spread: int = 2) -> TensorElement:
    basis = lie_basis(alphabet, order, degree, letters)
    if not len(basis):
        return TensorElement.zero(alphabet)
    return basis.combine([rng.randint(-spread, spread) for _ in range(len(basis))])


def random_derivation(alphabet: Alphabet, degree: int, orders: Iterable[int], rng: random.Random,
                      letters: Optional[Tuple[int, ...]] = None,
                      generators: Optional[Iterable[int]] = None) -> Derivation:
    """A seeded random Lie derivation with parts in the given orders."""
    orders = list(orders)
    images = {}
    for g in (range(alphabet.rank) if generators is None else generators):
        total = TensorElement.zero(alphabet)
        for order in orders:
            if order <= alphabet.truncation:
                total = total + random_lie_element(alphabet, order, alphabet.degrees[g] + degree, rng, letters)
        if not total.is_zero():
            images[g] = total
    return Derivation(alphabet, degree, images)
