"""Value domains the transforms and the layered engine compute in.

Three instantiations exist: the integer counting ring (checked int64 or exact
Python integers), extended integers with an INFINITY sentinel for the naive
(min,+) oracle, and truncated polynomials for the monomial embedding.
"""
import logging
from typing import Dict, Optional, Union

import numpy as np

from errors import ArithmeticOverflowError

logger = logging.getLogger(__name__)

# reserved (min,+) / (min,max) infinity, strictly above every accepted cost
INFINITY = 1 << 61

INT64_MAX = int(np.iinfo(np.int64).max)
INT32_MAX = int(np.iinfo(np.int32).max)


def check_int64_bound(bound: int, what: str):
    """💥 Refuse work whose worst-case magnitude leaves int64"""
    if bound > INT64_MAX:
        logger.error(f"❌ int64 overflow risk in {what}: bound {bound}")
        raise ArithmeticOverflowError(f"{what} may reach {bound}, above the int64 range")


def max_magnitude(values: np.ndarray) -> int:
    if values.size == 0:
        return 0
    if values.dtype == object:
        return max(abs(v) for v in values.tolist()) if values.size else 0
    return int(np.max(np.abs(values)))


def saturating_add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """➕ (min,+) addition on extended integers, INFINITY absorbing"""
    return np.minimum(np.asarray(a, dtype=np.int64) + np.asarray(b, dtype=np.int64), INFINITY)


class CoefficientPolynomial:
    """🧮 Sparse polynomial: exponent -> integer coefficient, zeros never stored"""

    __slots__ = ('terms',)

    def __init__(self, terms: Optional[Dict[int, int]] = None):
        self.terms: Dict[int, int] = {}
        for exponent, coefficient in (terms or {}).items():
            if exponent < 0:
                raise ValueError(f"negative exponent {exponent}")
            if coefficient:
                self.terms[int(exponent)] = int(coefficient)

    @classmethod
    def monomial(cls, exponent: int, coefficient: int = 1) -> 'CoefficientPolynomial':
        return cls({exponent: coefficient})

    @classmethod
    def embed(cls, value: int) -> 'CoefficientPolynomial':
        """📥 (min,+) value to monomial x^value; INFINITY maps to the zero polynomial"""
        if value >= INFINITY:
            return cls()
        return cls.monomial(int(value))

    @staticmethod
    def _coerce(other) -> Optional['CoefficientPolynomial']:
        if isinstance(other, CoefficientPolynomial):
            return other
        if isinstance(other, (int, np.integer)):
            return CoefficientPolynomial({0: int(other)})
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = terms.get(e, 0) + c
        return CoefficientPolynomial(terms)

    __radd__ = __add__

    def __neg__(self):
        return CoefficientPolynomial({e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        # coefficient form product: exponents add, coefficients multiply
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        terms: Dict[int, int] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                terms[e1 + e2] = terms.get(e1 + e2, 0) + c1 * c2
        return CoefficientPolynomial(terms)

    __rmul__ = __mul__

    def __eq__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        if not self.terms:
            return 'CoefficientPolynomial(0)'
        body = ' + '.join(f"{c}x^{e}" for e, c in sorted(self.terms.items()))
        return f'CoefficientPolynomial({body})'

    def min_exponent(self) -> Optional[int]:
        """🔻 The (min,+) value encoded, None for the zero polynomial"""
        return min(self.terms) if self.terms else None

    def pack(self, limb_bits: int) -> int:
        """📦 Kronecker packing, limb_bits bits per coefficient"""
        packed = 0
        for e, c in self.terms.items():
            if c < 0 or c >> limb_bits:
                raise ValueError(f"coefficient {c} does not fit a {limb_bits}-bit limb")
            packed |= c << (limb_bits * e)
        return packed

    @classmethod
    def unpack(cls, packed: int, limb_bits: int) -> 'CoefficientPolynomial':
        terms = {}
        limb_mask = (1 << limb_bits) - 1
        exponent = 0
        while packed:
            coefficient = packed & limb_mask
            if coefficient:
                terms[exponent] = coefficient
            packed >>= limb_bits
            exponent += 1
        return cls(terms)


class ValueDomain:
    """🧩 Ring the FSC machinery multiplies in"""

    name = 'abstract'
    dtype: Union[type, np.dtype] = object
    storage_dtype: Union[type, np.dtype] = object

    def zeros(self, size: int) -> np.ndarray:
        return np.zeros(size, dtype=self.storage_dtype)

    def to_storage(self, values: np.ndarray, what: str = 'values') -> np.ndarray:
        return values

    def multiply(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def check_products(self, max_a: int, max_b: int, terms: int, what: str):
        """Verify a sum of `terms` products stays representable"""

    def slice_bound(self, values: np.ndarray) -> int:
        return 0


class CountingDomain(ValueDomain):
    """🔢 Non-negative integer counting ring.

    exact=False computes in int64 with every product batch bound-checked;
    exact=True switches to Python integers. compact stores cached slices as
    int32 (the clamped feasibility DP never exceeds C(n, n/2)).
    """

    def __init__(self, exact: bool = False, compact: bool = False):
        self.exact = exact
        self.compact = compact and not exact
        self.name = 'counting-exact' if exact else 'counting'
        self.dtype = object if exact else np.int64
        self.storage_dtype = np.int32 if self.compact else self.dtype

    def to_storage(self, values: np.ndarray, what: str = 'values') -> np.ndarray:
        if self.exact:
            return values.astype(object)
        if self.compact:
            if values.size and int(values.max()) > INT32_MAX:
                logger.error(f"❌ {what} exceeds the int32 slice storage")
                raise ArithmeticOverflowError(f"{what} exceeds the int32 slice storage")
            return values.astype(np.int32)
        return values.astype(np.int64)

    def multiply(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if self.exact:
            return a * b
        return a.astype(np.int64) * b

    def check_products(self, max_a: int, max_b: int, terms: int, what: str):
        if not self.exact:
            check_int64_bound(max_a * max_b * terms, what)

    def slice_bound(self, values: np.ndarray) -> int:
        return max_magnitude(values)


class PackedPolynomialDomain(ValueDomain):
    """🧵 Polynomials mod x^(budget+1), packed into one Python int per set.

    Coefficients stay non-negative everywhere the layered engine computes
    (zeta sums, products, Moebius of ranked products), so packed addition and
    subtraction never carry or borrow across limbs while every coefficient
    fits limb_bits.
    """

    name = 'polynomial'
    dtype = object
    storage_dtype = object

    def __init__(self, budget: int, limb_bits: int):
        if budget < 0 or limb_bits < 1:
            raise ValueError("budget must be >= 0 and limb_bits >= 1")
        self.budget = budget
        self.limb_bits = limb_bits
        self.mask = (1 << (limb_bits * (budget + 1))) - 1

    def to_storage(self, values: np.ndarray, what: str = 'values') -> np.ndarray:
        return values.astype(object)

    def multiply(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return (a * b) & self.mask

    def monomial(self, exponent: int) -> int:
        if exponent > self.budget:
            raise ArithmeticOverflowError(f"exponent {exponent} above budget {self.budget}")
        return 1 << (self.limb_bits * exponent)

    def embed(self, value: int) -> int:
        return 0 if value >= INFINITY else self.monomial(int(value))

    def min_exponent(self, packed: int) -> Optional[int]:
        if not packed:
            return None
        return ((packed & -packed).bit_length() - 1) // self.limb_bits

    def to_polynomial(self, packed: int) -> CoefficientPolynomial:
        return CoefficientPolynomial.unpack(int(packed), self.limb_bits)
