#!/usr/bin/env python3
"""
cinf-lift - Forms and Symplectic Geometry

Forms are signed cyclic words over the letters g_i and dg_i. A letter g has
bidegree (0, |g|) and dg has (1, |g|); exchanging objects of bidegrees
(p, q) and (p', q') costs (-1)^{pp' + qq'}. The operators d, i_xi, L_xi and
pullbacks act letter by letter and descend to rotation classes.

Words are kept up to N + 1 letters, N being the alphabet's truncation, so a
vector field of order N still has a 1-form partner.
"""

import logging
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from errors import InputError, PreconditionError
from exact_linalg import SparseMatrix, determinant
from graded_core import Algebra, format_scalar, sign
from lie_calculus import (Alphabet, Derivation, PointedDiffeo, TensorElement, conjugate, derivation_bracket,
                          is_lie, lie_basis, random_lie_element)

logger = logging.getLogger(__name__)

FormWord = Tuple[int, ...]
ZERO = Fraction(0)


def letter(g: int, marked: bool = False) -> int:
    """Letter code: g_i is 2i, dg_i is 2i + 1."""
    return 2 * g + int(marked)


def _form_limit(alphabet: Alphabet) -> int:
    return alphabet.truncation + 1


@lru_cache(maxsize=None)
def canonical_word(word: FormWord, degrees: Tuple[int, ...]) -> Optional[Tuple[FormWord, int]]:
    """
    Canonical rotation of a cyclic word and the sign relating the two.

    Words with exactly one dg are rotated to end in it; all others use the
    lexicographically least rotation. Returns None when the class is zero.
    """
    if not word:
        return word, 1
    total_p = sum(code & 1 for code in word)
    total_q = sum(degrees[code >> 1] for code in word)
    seen: Dict[FormWord, int] = {}
    current, s = word, 1
    for _ in range(len(word)):
        if current in seen:
            if seen[current] != s:
                return None
        else:
            seen[current] = s
        last = current[-1]
        p, q = last & 1, degrees[last >> 1]
        s *= sign(p * (total_p - p) + q * (total_q - q))
        current = (last,) + current[:-1]
    if total_p == 1:
        rep = next(w for w in seen if w[-1] & 1)
    else:
        rep = min(seen)
    return rep, seen[rep]


class Form:
    """A combination of cyclic words of one form degree, stored on canonical words."""

    __slots__ = ("alphabet", "form_degree", "terms")

    def __init__(self, alphabet: Alphabet, form_degree: int,
                 terms: Optional[Dict[Sequence[int], object]] = None, canonical: bool = False):
        self.alphabet = alphabet
        self.form_degree = form_degree
        self.terms: Dict[FormWord, Fraction] = {}
        degrees = alphabet.degrees
        for word, coeff in (terms or {}).items():
            coeff = Fraction(coeff)
            if not coeff:
                continue
            word = tuple(word)
            if canonical:
                rep, s = word, 1
            else:
                if sum(code & 1 for code in word) != form_degree:
                    raise InputError(f"word {word} is not a {form_degree}-form")
                found = canonical_word(word, degrees)
                if found is None:
                    continue
                rep, s = found
            value = self.terms.get(rep, ZERO) + s * coeff
            if value:
                self.terms[rep] = value
            else:
                self.terms.pop(rep, None)

    @classmethod
    def zero(cls, alphabet: Alphabet, form_degree: int) -> "Form":
        return make_form(alphabet, form_degree, {})

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, word: Sequence[int]) -> Fraction:
        found = canonical_word(tuple(word), self.alphabet.degrees)
        if found is None:
            return ZERO
        rep, s = found
        return s * self.terms.get(rep, ZERO)

    def __eq__(self, other) -> bool:
        if isinstance(other, int) and other == 0:
            return not self.terms
        if not isinstance(other, Form):
            return NotImplemented
        if not self.terms and not other.terms:
            return True
        return self.form_degree == other.form_degree and self.terms == other.terms

    __hash__ = None

    def _combine(self, other: "Form", factor: Fraction) -> "Form":
        if other.is_zero():
            return self
        if self.is_zero() and self.form_degree != other.form_degree:
            return other.scaled(factor)
        if other.form_degree != self.form_degree:
            raise InputError(f"cannot add a {self.form_degree}-form and a {other.form_degree}-form")
        terms = dict(self.terms)
        for word, coeff in other.terms.items():
            value = terms.get(word, ZERO) + factor * coeff
            if value:
                terms[word] = value
            else:
                terms.pop(word, None)
        return make_form(self.alphabet, self.form_degree, terms, canonical=True)

    def __add__(self, other: "Form") -> "Form":
        return self._combine(other, Fraction(1))

    def __sub__(self, other: "Form") -> "Form":
        return self._combine(other, Fraction(-1))

    def __neg__(self) -> "Form":
        return self.scaled(-1)

    def scaled(self, factor) -> "Form":
        factor = Fraction(factor)
        terms = {w: factor * c for w, c in self.terms.items()} if factor else {}
        return make_form(self.alphabet, self.form_degree, terms, canonical=True)

    def __mul__(self, factor) -> "Form":
        return self.scaled(factor)

    __rmul__ = __mul__

    def orders(self) -> List[int]:
        """Word lengths present, counting g and dg letters alike."""
        return sorted({len(w) for w in self.terms})

    def order_part(self, order: int) -> "Form":
        return make_form(self.alphabet, self.form_degree,
                         {w: c for w, c in self.terms.items() if len(w) == order}, canonical=True)

    def truncated(self, order: int) -> "Form":
        return make_form(self.alphabet, self.form_degree,
                         {w: c for w, c in self.terms.items() if len(w) <= order}, canonical=True)

    @property
    def degree(self) -> Optional[int]:
        """Internal degree; None for zero."""
        found = {sum(self.alphabet.degrees[c >> 1] for c in w) for w in self.terms}
        if not found:
            return None
        if len(found) > 1:
            raise InputError(f"form is not degree homogeneous: degrees {sorted(found)}")
        return found.pop()

    def letters(self) -> set:
        return {c >> 1 for w in self.terms for c in w}

    def format_word(self, word: FormWord) -> str:
        names = self.alphabet.names
        return "*".join(("d" + names[c >> 1]) if c & 1 else names[c >> 1] for c in word) or "1"

    def format(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"{format_scalar(self.terms[w])}*[{self.format_word(w)}]"
                          for w in sorted(self.terms, key=lambda w: (len(w), w)))

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.format()})"


class CyclicZeroForm(Form):
    """Cyclic words without dg letters."""

    __slots__ = ()

    @classmethod
    def from_tensor(cls, x: TensorElement) -> "CyclicZeroForm":
        """The cyclic class of each word of x."""
        return make_form(x.alphabet, 0, {tuple(2 * i for i in w): c for w, c in x.terms.items() if w})

    def words(self) -> Dict[Tuple[int, ...], Fraction]:
        return {tuple(c >> 1 for c in w): v for w, v in self.terms.items()}


class OneForm(Form):
    """Forms sum_b A_b dg_b; the canonical word of each term ends in its dg."""

    __slots__ = ()

    @classmethod
    def from_coefficients(cls, alphabet: Alphabet, coefficients: Dict[int, TensorElement]) -> "OneForm":
        terms: Dict[FormWord, Fraction] = {}
        for b, element in coefficients.items():
            for w, c in element.terms.items():
                terms[tuple(2 * i for i in w) + (letter(b, True),)] = c
        return make_form(alphabet, 1, terms, canonical=True)

    def coefficients(self) -> Dict[int, TensorElement]:
        """The coefficient A_b of each dg_b."""
        grouped: Dict[int, Dict[Tuple[int, ...], Fraction]] = {}
        for w, c in self.terms.items():
            grouped.setdefault(w[-1] >> 1, {})[tuple(code >> 1 for code in w[:-1])] = c
        return {b: TensorElement(self.alphabet, t) for b, t in grouped.items()}

    def coefficient_orders(self) -> List[int]:
        return sorted({len(w) - 1 for w in self.terms})

    def is_normalised(self, unit: int) -> bool:
        """Coefficients free of the unit's letter."""
        return all(code >> 1 != unit for w in self.terms for code in w[:-1])


class TwoForm(Form):
    __slots__ = ()


_FORM_CLASSES = {0: CyclicZeroForm, 1: OneForm, 2: TwoForm}


def make_form(alphabet: Alphabet, form_degree: int, terms: Dict, canonical: bool = False) -> Form:
    cls = _FORM_CLASSES.get(form_degree, Form)
    return cls(alphabet, form_degree, terms, canonical)


LetterImage = Callable[[int], Dict[FormWord, Fraction]]


def _letterwise(f: Form, bidegree: Tuple[int, int], image_of: LetterImage, out_degree: int) -> Form:
    """Apply the derivation of the given bidegree defined on letters by `image_of`."""
    a, b = bidegree
    degrees = f.alphabet.degrees
    limit = _form_limit(f.alphabet)
    cache: Dict[int, Dict[FormWord, Fraction]] = {}
    raw: Dict[FormWord, Fraction] = {}
    for word, coeff in f.terms.items():
        p_prefix = q_prefix = 0
        for k, code in enumerate(word):
            if code not in cache:
                cache[code] = image_of(code)
            image = cache[code]
            if image:
                factor = coeff * sign(a * p_prefix + b * q_prefix)
                head, tail = word[:k], word[k + 1:]
                rest = len(word) - 1
                for u, c in image.items():
                    if rest + len(u) <= limit:
                        key = head + u + tail
                        raw[key] = raw.get(key, ZERO) + factor * c
            p_prefix += code & 1
            q_prefix += degrees[code >> 1]
    return make_form(f.alphabet, out_degree, raw)


def _unmarked(x: TensorElement) -> Dict[FormWord, Fraction]:
    return {tuple(2 * i for i in w): c for w, c in x.terms.items()}


def _differential(x: TensorElement) -> Dict[FormWord, Fraction]:
    """d of a function word: mark each letter in turn."""
    out: Dict[FormWord, Fraction] = {}
    for w, c in x.terms.items():
        base = tuple(2 * i for i in w)
        for k in range(len(base)):
            key = base[:k] + (base[k] | 1,) + base[k + 1:]
            out[key] = out.get(key, ZERO) + c
    return out


def d_form(f: Form) -> Form:
    """De Rham differential; bidegree (1, 0)."""
    return _letterwise(f, (1, 0), lambda code: {} if code & 1 else {(code | 1,): Fraction(1)},
                       f.form_degree + 1)


def contract(xi: Derivation, f: Form) -> Form:
    """i_xi: i_xi(g) = 0, i_xi(dg) = xi(g); bidegree (-1, |xi|)."""
    if f.form_degree == 0:
        return Form.zero(f.alphabet, 0)
    return _letterwise(f, (1, xi.degree),
                       lambda code: _unmarked(xi.image(code >> 1)) if code & 1 else {},
                       f.form_degree - 1)


def lie_derivative(xi: Derivation, f: Form) -> Form:
    """L_xi: L_xi(g) = xi(g), L_xi(dg) = d(xi(g)); bidegree (0, |xi|)."""
    def image_of(code):
        target = xi.image(code >> 1)
        return _differential(target) if code & 1 else _unmarked(target)
    return _letterwise(f, (0, xi.degree), image_of, f.form_degree)


def pullback(phi: PointedDiffeo, f: Form) -> Form:
    """phi^*, the algebra map with phi^*(g) = phi(g) and phi^*(dg) = d(phi(g))."""
    limit = _form_limit(f.alphabet)
    cache: Dict[int, Dict[FormWord, Fraction]] = {}
    raw: Dict[FormWord, Fraction] = {}
    for word, coeff in f.terms.items():
        current: Dict[FormWord, Fraction] = {(): coeff}
        for code in word:
            if code not in cache:
                target = phi.image(code >> 1)
                cache[code] = _differential(target) if code & 1 else _unmarked(target)
            step: Dict[FormWord, Fraction] = {}
            for u, c in current.items():
                for v, a in cache[code].items():
                    if len(u) + len(v) <= limit:
                        step[u + v] = step.get(u + v, ZERO) + c * a
            current = step
        for key, c in current.items():
            raw[key] = raw.get(key, ZERO) + c
    return make_form(f.alphabet, f.form_degree, raw)


def d_lie(x: TensorElement) -> OneForm:
    """
    The universal derivation of Lie elements into 1-forms.

    d(g) = 1 dg and d[y, z] = y dz - (-1)^{|y||z|} z dy; on a Lie element this
    marks the last letter of every word.
    """
    if not is_lie(x):
        raise InputError(f"d_lie needs a Lie element, got {x.format()}")
    terms = {tuple(2 * i for i in w[:-1]) + (letter(w[-1], True),): c for w, c in x.terms.items() if w}
    return make_form(x.alphabet, 1, terms, canonical=True)


def euler_homotopy(alpha: Form) -> CyclicZeroForm:
    """
    Invert d on a closed 1-form: each word of n letters contributes 1/n of its
    cyclic class with the dg turned back into g.

    Raises PreconditionError carrying d(alpha) when alpha is not closed.
    """
    if alpha.form_degree != 1:
        raise InputError(f"euler homotopy needs a 1-form, got form degree {alpha.form_degree}")
    residual = d_form(alpha)
    if not residual.is_zero():
        raise PreconditionError("1-form is not closed", witness=residual.format())
    raw = {}
    for w, c in alpha.terms.items():
        raw[tuple(code & ~1 for code in w)] = c / len(w)
    return make_form(alpha.alphabet, 0, raw)


@dataclass(frozen=True)
class ConstantTwoForm:
    """
    omega = 1/2 sum_ab W_ab dg_a dg_b with W_ab = -(-1)^{|g_a||g_b|} W_ba.

    `degree` is the internal degree |g_a| + |g_b| of every nonzero entry.
    """
    alphabet: Alphabet
    matrix: Tuple[Tuple[Fraction, ...], ...]
    degree: int

    def __post_init__(self):
        r = self.alphabet.rank
        object.__setattr__(self, "matrix", tuple(tuple(Fraction(v) for v in row) for row in self.matrix))
        if len(self.matrix) != r or any(len(row) != r for row in self.matrix):
            raise InputError(f"constant 2-form needs a {r}x{r} matrix")
        deg = self.alphabet.degrees
        for a in range(r):
            for b in range(r):
                w = self.matrix[a][b]
                if w and deg[a] + deg[b] != self.degree:
                    raise InputError(f"entry ({a},{b}) does not have internal degree {self.degree}")
                if w != -sign(deg[a] * deg[b]) * self.matrix[b][a]:
                    raise InputError(f"matrix is not graded skew at ({a},{b})")

    @classmethod
    def from_form(cls, form: Form) -> "ConstantTwoForm":
        """Read W off a 2-form made of dg_a dg_b words only."""
        if form.form_degree != 2:
            raise InputError("not a 2-form")
        alphabet = form.alphabet
        r = alphabet.rank
        deg = alphabet.degrees
        matrix = [[ZERO] * r for _ in range(r)]
        for w, c in form.terms.items():
            if len(w) != 2 or not (w[0] & 1 and w[1] & 1):
                raise InputError(f"2-form is not constant: contains [{form.format_word(w)}]")
            a, b = w[0] >> 1, w[1] >> 1
            if a == b:
                matrix[a][a] = 2 * c
            else:
                matrix[a][b] = c
                matrix[b][a] = -sign(deg[a] * deg[b]) * c
        degree = form.degree if not form.is_zero() else 0
        return cls(alphabet, tuple(tuple(row) for row in matrix), degree)

    def to_form(self) -> TwoForm:
        terms = {}
        for a, row in enumerate(self.matrix):
            for b, w in enumerate(row):
                if w:
                    terms[(letter(a, True), letter(b, True))] = w / 2
        return make_form(self.alphabet, 2, terms)

    @cached_property
    def _inverse(self) -> Optional[SparseMatrix]:
        if determinant(self.matrix) == 0:
            return None
        return SparseMatrix.from_dense(self.matrix).inverse()

    def is_nondegenerate(self) -> bool:
        return self._inverse is not None

    def inverse_matrix(self) -> SparseMatrix:
        if self._inverse is None:
            raise PreconditionError("constant 2-form is degenerate")
        return self._inverse

    def with_alphabet(self, alphabet: Alphabet) -> "ConstantTwoForm":
        return ConstantTwoForm(alphabet, self.matrix, self.degree)


def kappa(omega: Union[ConstantTwoForm, Form]) -> Tuple[Tuple[Fraction, ...], ...]:
    """The bilinear form kappa(omega)_ab = (-1)^{|g_a|} W_ab."""
    if not isinstance(omega, ConstantTwoForm):
        omega = ConstantTwoForm.from_form(omega)
    deg = omega.alphabet.degrees
    return tuple(tuple(sign(deg[a]) * w for w in row) for a, row in enumerate(omega.matrix))


def kappa_inv(matrix: Sequence[Sequence], alphabet: Alphabet, degree: int) -> ConstantTwoForm:
    """Inverse of kappa; `degree` is the internal degree of the resulting form."""
    deg = alphabet.degrees
    skew = tuple(tuple(sign(deg[a]) * Fraction(v) for v in row) for a, row in enumerate(matrix))
    return ConstantTwoForm(alphabet, skew, degree)


def symplectic_form(algebra: Algebra, alphabet: Alphabet) -> ConstantTwoForm:
    """
    The constant symplectic form of the algebra's pairing.

    Raises PreconditionError without a pairing, for odd pairing degree, or
    when the pairing is degenerate.
    """
    pairing = algebra.pairing
    if pairing is None:
        raise PreconditionError(f"algebra {algebra.name} has no pairing")
    if pairing.degree % 2:
        raise PreconditionError(f"odd pairing degree {pairing.degree} is not supported")
    try:
        omega = kappa_inv(pairing.matrix, alphabet, pairing.symplectic_degree)
    except InputError as exc:
        raise PreconditionError(f"pairing does not define a 2-form: {exc.message}")
    if not omega.is_nondegenerate():
        raise PreconditionError("pairing is degenerate")
    return omega


def phi(xi: Derivation, omega: ConstantTwoForm) -> OneForm:
    """Phi(xi) = i_xi(omega) = sum_ab W_ab xi(g_a) dg_b."""
    omega.inverse_matrix()
    alphabet = xi.alphabet
    coefficients: Dict[int, TensorElement] = {}
    for a, image in xi.images.items():
        for b, w in enumerate(omega.matrix[a]):
            if w:
                coefficients[b] = coefficients.get(b, TensorElement.zero(alphabet)) + image.scaled(w)
    return OneForm.from_coefficients(alphabet, coefficients)


def phi_inv(alpha: Form, omega: ConstantTwoForm) -> Derivation:
    """Inverse of phi: xi(g_a) = sum_b (W^{-1})_ba A_b."""
    if alpha.form_degree != 1:
        raise InputError(f"phi_inv needs a 1-form, got form degree {alpha.form_degree}")
    inverse = omega.inverse_matrix()
    alphabet = alpha.alphabet
    if alpha.is_zero():
        return Derivation.zero(alphabet, 0)
    degree = alpha.degree - omega.degree
    images: Dict[int, TensorElement] = {}
    for b, coeff in alpha.coefficients().items():
        for a, w in inverse.rows[b].items():
            images[a] = images.get(a, TensorElement.zero(alphabet)) + coeff.scaled(w)
    return Derivation(alphabet, degree, images, check=False)


def upsilon(alpha: Form, omega: ConstantTwoForm) -> Derivation:
    """The symplectic vector field Phi^{-1}(d alpha) of a cyclic 0-form."""
    if alpha.form_degree != 0:
        raise InputError(f"upsilon needs a 0-form, got form degree {alpha.form_degree}")
    if alpha.is_zero():
        return Derivation.zero(alpha.alphabet, 1 - omega.degree)
    return phi_inv(d_form(alpha), omega)


def is_symplectic_field(xi: Derivation, omega: ConstantTwoForm) -> Form:
    """L_xi(omega); zero exactly when xi is symplectic."""
    return lie_derivative(xi, omega.to_form())


def upsilon_inv(xi: Derivation, omega: ConstantTwoForm) -> CyclicZeroForm:
    """
    The 0-form whose upsilon is xi.

    Raises PreconditionError carrying L_xi(omega) for non-symplectic xi.
    """
    residual = is_symplectic_field(xi, omega)
    if not residual.is_zero():
        raise PreconditionError("vector field is not symplectic", witness=residual.format())
    return euler_homotopy(phi(xi, omega))


def is_symplectomorphism(phi_map: PointedDiffeo, omega: ConstantTwoForm,
                         omega_target: Optional[ConstantTwoForm] = None) -> Form:
    """phi^*(omega') - omega; zero exactly when phi carries omega' back to omega."""
    target = omega if omega_target is None else omega_target
    return pullback(phi_map, target.to_form()) - omega.to_form()


def cyclic_product(b: TensorElement, g: int) -> CyclicZeroForm:
    """The class [b g], kept up to N + 1 letters."""
    limit = _form_limit(b.alphabet)
    raw = {tuple(2 * i for i in w) + (letter(g),): c for w, c in b.terms.items() if len(w) < limit}
    return make_form(b.alphabet, 0, raw)


def random_cyclic_form(alphabet: Alphabet, order: int, degree: int, rng: random.Random,
                       letters: Optional[Tuple[int, ...]] = None) -> CyclicZeroForm:
    """A seeded random 0-form sum_g [b_g g] with Lie coefficients b_g of order - 1."""
    if order < 2:
        raise InputError("random cyclic forms start at order 2")
    pool = range(alphabet.rank) if letters is None else letters
    total = Form.zero(alphabet, 0)
    for g in pool:
        b = random_lie_element(alphabet, order - 1, degree - alphabet.degrees[g], rng, letters)
        if not b.is_zero():
            total = total + cyclic_product(b, g)
    return total


def lie_zero_forms(alphabet: Alphabet, order: int, degree: int,
                   letters: Optional[Tuple[int, ...]] = None) -> List[CyclicZeroForm]:
    """Spanning set [b g] of the Lie 0-forms of one order and internal degree."""
    pool = range(alphabet.rank) if letters is None else letters
    spanning = []
    for g in pool:
        for b in lie_basis(alphabet, order - 1, degree - alphabet.degrees[g], letters).elements:
            form = cyclic_product(b, g)
            if not form.is_zero():
                spanning.append(form)
    return spanning


def random_form(alphabet: Alphabet, form_degree: int, length: int, rng: random.Random,
                terms: int = 3) -> Form:
    """A seeded random combination of cyclic words with `form_degree` marked letters."""
    if not 1 <= length <= _form_limit(alphabet) or form_degree > length:
        raise InputError(f"no {form_degree}-form words of length {length}")
    raw: Dict[FormWord, Fraction] = {}
    for _ in range(terms):
        word = [letter(rng.randrange(alphabet.rank)) for _ in range(length)]
        for k in rng.sample(range(length), form_degree):
            word[k] |= 1
        key = tuple(word)
        raw[key] = raw.get(key, ZERO) + rng.randint(-3, 3)
    return make_form(alphabet, form_degree, raw)


def cartan_residuals(xi: Derivation, gamma: Derivation, phi_map: PointedDiffeo, alpha: Form) -> Dict[str, Form]:
    """
    Both sides of the Cartan identities on `alpha`, subtracted.

    Words longer than the alphabet's truncation are dropped before
    comparing, since conjugated fields are only known that far.
    """
    limit = alpha.alphabet.truncation
    s = sign(xi.degree * gamma.degree)
    bracket = derivation_bracket(xi, gamma)
    moved = conjugate(phi_map, xi)
    pulled = pullback(phi_map, alpha)
    residuals = {
        "L = [i, d]": lie_derivative(xi, alpha) - contract(xi, d_form(alpha)) - d_form(contract(xi, alpha)),
        "[L, i] = i[,]": (lie_derivative(xi, contract(gamma, alpha))
                          - contract(gamma, lie_derivative(xi, alpha)).scaled(s)
                          - contract(bracket, alpha)),
        "[L, L] = L[,]": (lie_derivative(xi, lie_derivative(gamma, alpha))
                          - lie_derivative(gamma, lie_derivative(xi, alpha)).scaled(s)
                          - lie_derivative(bracket, alpha)),
        "[i, i] = 0": (contract(xi, contract(gamma, alpha))
                       + contract(gamma, contract(xi, alpha)).scaled(s)),
        "[L, d] = 0": lie_derivative(xi, d_form(alpha)) - d_form(lie_derivative(xi, alpha)),
        "pullback L": pullback(phi_map, lie_derivative(xi, alpha)) - lie_derivative(moved, pulled),
        "pullback i": pullback(phi_map, contract(xi, alpha)) - contract(moved, pulled),
    }
    return {name: r.truncated(limit) for name, r in residuals.items()}
