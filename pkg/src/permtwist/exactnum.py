"""Exact coefficient arithmetic: rationals extended by sqrt(k) and a k-th root of unity.

Every series coefficient and module-vector entry downstream lives in the
commutative ring

    Q[t, s] / (Phi_k(t), s^2 - k)

where t is a primitive k-th root of unity (eta), Phi_k is the k-th cyclotomic
polynomial, and s plays sqrt(k).  When k is a perfect square m^2 the generator
s collapses to the rational m at ring construction, so the ring is an honest
cyclotomic field in that case.  For general k the composite quotient may have
zero divisors; that is safe here because the engine only ever inverts monomial
units q*s^eps*t^m (asserted, never silently divided).

All values are immutable and normalized eagerly, so structural equality equals
ring equality.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
import math
import re

Rat = Fraction


class RingMismatchError(ValueError):
    """Raised when combining scalars from rings with different k."""


class NotAUnitError(ValueError):
    """Raised when inverting anything other than a monomial unit q*s^eps*t^m."""


def _poly_divide_exact(num: list[int], den: list[int]) -> list[int]:
    """Exact division of integer polynomials (lists of coeffs, low degree first).

    Used only to build cyclotomic polynomials, where the division is known to
    be exact over Z.
    """
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    for i in range(len(out) - 1, -1, -1):
        c = num[i + len(den) - 1]
        q, r = divmod(c, den[-1])
        if r:
            raise ArithmeticError("inexact cyclotomic division")
        out[i] = q
        for j, d in enumerate(den):
            num[i + j] -= q * d
    if any(num[: len(den) - 1]):
        raise ArithmeticError("nonzero remainder in cyclotomic division")
    return out


@lru_cache(maxsize=None)
def cyclotomic_poly(k: int) -> tuple[int, ...]:
    """Coefficients of Phi_k, lowest degree first, computed by exact division:

        Phi_k(x) = (x^k - 1) / prod_{d | k, d < k} Phi_d(x)
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if k == 1:
        return (-1, 1)
    num = [-1] + [0] * (k - 1) + [1]
    for d in range(1, k):
        if k % d == 0:
            num = _poly_divide_exact(num, list(cyclotomic_poly(d)))
    return tuple(num)


# Basis monomials are keyed (eps, m): the element s^eps * t^m with
# eps in {0, 1} and 0 <= m < deg Phi_k.  Coefficient maps drop zeros.
_Key = tuple[int, int]


class ScalarRing:
    """The ring Q[t,s]/(Phi_k(t), s^2 - k) for one fixed k.

    Holds the reduction table for powers of t and the square-root collapse;
    acts as a factory for Scalar values.
    """

    def __init__(self, k: int):
        if k < 1:
            raise ValueError("k must be a positive integer")
        self.k = k
        phi = cyclotomic_poly(k)
        self.degree = len(phi) - 1
        root = math.isqrt(k)
        self.sqrt_collapse = root if root * root == k else None

        # t^m for m up to 2k expressed in the basis 1, t, ..., t^(deg-1).
        # Products of reduced elements only reach 2*(deg-1), but eta(p)
        # construction wants any p < k, so cover both.
        lead = Fraction(phi[-1])  # always 1 for cyclotomics, kept for clarity
        reduction: list[dict[int, Fraction]] = []
        for m in range(2 * k + 1):
            if m < self.degree:
                reduction.append({m: Fraction(1)})
                continue
            # t^m = t * t^(m-1), then knock down the top power via Phi_k.
            prev = reduction[m - 1]
            cur: dict[int, Fraction] = {}
            for e, c in prev.items():
                if e + 1 < self.degree:
                    cur[e + 1] = cur.get(e + 1, Fraction(0)) + c
                else:
                    # t^deg = -(phi[0] + phi[1] t + ...)/lead
                    for j in range(self.degree):
                        cur[j] = cur.get(j, Fraction(0)) - c * Fraction(phi[j]) / lead
            reduction.append({e: c for e, c in cur.items() if c})
        self._tpow = reduction

        self.zero = Scalar(self, {})
        self.one = Scalar(self, {(0, 0): Fraction(1)})

    # -- element constructors -------------------------------------------------

    def rational(self, q) -> Scalar:
        q = Fraction(q)
        return Scalar(self, {(0, 0): q} if q else {})

    def eta(self, power: int = 1) -> Scalar:
        """t^power, reduced (eta is the fixed primitive k-th root of unity)."""
        m = power % self.k
        return Scalar(self, {(0, e): c for e, c in self._tpow[m].items()})

    def sqrt_k(self) -> Scalar:
        if self.sqrt_collapse is not None:
            return self.rational(self.sqrt_collapse)
        return Scalar(self, {(1, 0): Fraction(1)})

    def sqrt_k_pow(self, n: int) -> Scalar:
        """(sqrt k)^n for any integer n, using s^2 = k and s^-1 = s/k."""
        q, r = divmod(n, 2)
        out = self.rational(Fraction(self.k) ** q)
        if r:
            out = out * self.sqrt_k()
        return out

    def eta_average(self, p: int) -> Scalar:
        """(1/k) sum_i t^(i*p): the projector weight, 1 if k | p else 0."""
        acc = self.zero
        for i in range(self.k):
            acc = acc + self.eta(i * p)
        return acc * Fraction(1, self.k)

    def __repr__(self):
        return f"ScalarRing(k={self.k})"

    def __eq__(self, other):
        return isinstance(other, ScalarRing) and other.k == self.k

    def __hash__(self):
        return hash(("ScalarRing", self.k))


@lru_cache(maxsize=None)
def get_ring(k: int) -> ScalarRing:
    return ScalarRing(k)


class Scalar:
    """Immutable element of a ScalarRing in canonical reduced form."""

    __slots__ = ("ring", "coeffs", "_hash")

    def __init__(self, ring: ScalarRing, coeffs: dict[_Key, Fraction]):
        self.ring = ring
        self.coeffs = {key: c for key, c in coeffs.items() if c}
        self._hash = None

    # -- ring structure --------------------------------------------------------

    def _check(self, other: "Scalar"):
        if self.ring.k != other.ring.k:
            raise RingMismatchError(
                f"cannot combine scalars over k={self.ring.k} and k={other.ring.k}"
            )

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.ring.rational(other)
        self._check(other)
        out = dict(self.coeffs)
        for key, c in other.coeffs.items():
            out[key] = out.get(key, Fraction(0)) + c
        return Scalar(self.ring, out)

    __radd__ = __add__

    def __neg__(self):
        return Scalar(self.ring, {key: -c for key, c in self.coeffs.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.ring.rational(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            q = Fraction(other)
            if not q:
                return self.ring.zero
            return Scalar(self.ring, {key: c * q for key, c in self.coeffs.items()})
        self._check(other)
        ring = self.ring
        tpow = ring._tpow
        k_rat = Fraction(ring.k)
        out: dict[_Key, Fraction] = {}
        for (e1, m1), c1 in self.coeffs.items():
            for (e2, m2), c2 in other.coeffs.items():
                c = c1 * c2
                eps = e1 + e2
                if eps == 2:
                    eps = 0
                    c = c * k_rat
                for mb, cb in tpow[m1 + m2].items():
                    key = (eps, mb)
                    out[key] = out.get(key, Fraction(0)) + c * cb
        return Scalar(ring, out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (Fraction(1) / Fraction(other))
        return self * other.invert()

    def invert(self) -> "Scalar":
        """Inverse of a monomial unit q*s^eps*t^m.

        Reduced coefficients can hide the monomial shape (e.g. t^2 = -1 - t for
        k=3), so instead of inspecting self we search the 2k candidate monomials
        b = s^eps*t^m for one with self*b rational.
        """
        if not self.coeffs:
            raise NotAUnitError("zero is not invertible")
        ring = self.ring
        eps_range = (0,) if ring.sqrt_collapse is not None else (0, 1)
        for eps in eps_range:
            for m in range(ring.k):
                b = Scalar(ring, {(eps, 0): Fraction(1)}) * ring.eta(m)
                prod = self * b
                keys = list(prod.coeffs.keys())
                if keys == [(0, 0)]:
                    q = prod.coeffs[(0, 0)]
                    return b * (Fraction(1) / q)
        raise NotAUnitError(f"not a monomial unit: {self.render()}")

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_rational(self) -> bool:
        return set(self.coeffs) <= {(0, 0)}

    def as_rational(self) -> Fraction:
        if not self.coeffs:
            return Fraction(0)
        if not self.is_rational():
            raise ValueError(f"not rational: {self.render()}")
        return self.coeffs[(0, 0)]

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.ring.rational(other)
        if not isinstance(other, Scalar):
            return NotImplemented
        return self.ring.k == other.ring.k and self.coeffs == other.coeffs

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ring.k, tuple(sorted(self.coeffs.items()))))
        return self._hash

    # -- rendering / parsing ---------------------------------------------------

    def render(self) -> str:
        """Canonical text form: '*'-joined monomials 'q', 'q*s', 'q*t^m', 'q*s*t^m',
        summed with ' + ' / ' - '.  Parsed back by parse_scalar."""
        if not self.coeffs:
            return "0"
        parts = []
        for (eps, m), c in sorted(self.coeffs.items()):
            atoms = []
            if eps:
                atoms.append("s")
            if m:
                atoms.append("t" if m == 1 else f"t^{m}")
            mag = abs(c)
            if not atoms or mag != 1:
                atoms.insert(0, str(mag))
            body = "*".join(atoms)
            if not parts:
                parts.append(body if c > 0 else f"-{body}")
            else:
                parts.append(f" + {body}" if c > 0 else f" - {body}")
        return "".join(parts)

    def __repr__(self):
        return f"<{self.render()} : k={self.ring.k}>"


_TERM_RE = re.compile(
    r"^(?P<coeff>-?\d+(?:/\d+)?)?(?:(?<=\d)\*)?(?P<s>s)?(?:\*?t(?:\^(?P<m>\d+))?)?$"
)


def parse_scalar(ring: ScalarRing, text: str) -> Scalar:
    """Parse the grammar emitted by Scalar.render."""
    text = text.strip()
    if text == "0":
        return ring.zero
    # split on top-level ' + ' / ' - ' (no parentheses in the grammar)
    out = ring.zero
    for signed in re.finditer(r"([+-]?)\s*([^+\-\s][^+\-]*)", text.replace(" - ", " + -")):
        neg = signed.group(1) == "-"
        chunk = signed.group(2).strip()
        if chunk.startswith("-"):
            neg = not neg
            chunk = chunk[1:].strip()
        m = _TERM_RE.match(chunk)
        if not m or not chunk:
            raise ValueError(f"cannot parse scalar term {chunk!r}")
        coeff = Fraction(m.group("coeff")) if m.group("coeff") else Fraction(1)
        if neg:
            coeff = -coeff
        term = ring.rational(coeff)
        if m.group("s"):
            term = term * ring.sqrt_k()
        if "t" in chunk:
            power = int(m.group("m")) if m.group("m") else 1
            term = term * ring.eta(power)
        out = out + term
    return out
