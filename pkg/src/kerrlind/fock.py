"""Normal-ordered boson polynomials and their truncated Fock-space matrices."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from numbers import Number
from typing import Iterable

import numpy as np

from .errors import TruncationTooSmall

Term = tuple[int, int, complex]


def _canonical(terms: Iterable[Term]) -> tuple[Term, ...]:
    acc: dict[tuple[int, int], complex] = {}
    for m, n, c in terms:
        m, n = int(m), int(n)
        if m < 0 or n < 0:
            raise ValueError(f"ladder powers must be >= 0, got ({m}, {n})")
        acc[(m, n)] = acc.get((m, n), 0j) + complex(c)
    return tuple((m, n, c) for (m, n), c in sorted(acc.items()) if c != 0)


@dataclass(frozen=True)
class OperatorExpr:
    """Sum of monomials ``c * ad^m a^n``, stored as canonical ``(m, n, c)`` triples."""

    terms: tuple[Term, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", _canonical(self.terms))

    @classmethod
    def monomial(cls, m: int, n: int, coeff: complex = 1.0) -> "OperatorExpr":
        return cls(((m, n, coeff),))

    @classmethod
    def identity(cls, coeff: complex = 1.0) -> "OperatorExpr":
        return cls(((0, 0, coeff),))

    def __bool__(self):
        return bool(self.terms)

    def __add__(self, other):
        if isinstance(other, Number):
            other = OperatorExpr.identity(other)
        if not isinstance(other, OperatorExpr):
            return NotImplemented
        return OperatorExpr(self.terms + other.terms)

    __radd__ = __add__

    def __neg__(self):
        return OperatorExpr(tuple((m, n, -c) for m, n, c in self.terms))

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, scalar):
        if not isinstance(scalar, Number):
            return NotImplemented
        return OperatorExpr(tuple((m, n, c * scalar) for m, n, c in self.terms))

    __rmul__ = __mul__

    def coefficient(self, m: int, n: int) -> complex:
        for mm, nn, c in self.terms:
            if (mm, nn) == (m, n):
                return c
        return 0j

    @property
    def max_degree(self) -> int:
        return max((m + n for m, n, _ in self.terms), default=0)

    def parity(self) -> int | None:
        """Photon-number parity change (0 or 1) if every term agrees, else None."""
        pars = {(m - n) % 2 for m, n, _ in self.terms}
        if len(pars) > 1:
            return None
        return pars.pop() if pars else 0

    def is_hermitian(self, tol: float = 0.0) -> bool:
        diff = self - adjoint(self)
        return all(abs(c) <= tol for _, _, c in diff.terms)

    def __str__(self):
        if not self.terms:
            return "0"
        return " ".join(_format_term(m, n, c) for m, n, c in self.terms)


def _format_coeff(c: complex) -> str:
    if c.imag == 0:
        return f"{c.real:+.6g}"
    if c.real == 0:
        return f"{c.imag:+.6g}j"
    return f"+({c.real:.6g}{c.imag:+.6g}j)"


def _format_term(m: int, n: int, c: complex) -> str:
    ops = []
    if m:
        ops.append("ad" if m == 1 else f"ad^{m}")
    if n:
        ops.append("a" if n == 1 else f"a^{n}")
    body = " ".join(ops) if ops else "1"
    return f"{_format_coeff(c)}*{body}"


A = OperatorExpr.monomial(0, 1)
AD = OperatorExpr.monomial(1, 0)
NUM = OperatorExpr.monomial(1, 1)


def adjoint(expr: OperatorExpr) -> OperatorExpr:
    return OperatorExpr(tuple((n, m, c.conjugate()) for m, n, c in expr.terms))


def annihilation(dim: int) -> np.ndarray:
    """Truncated annihilation matrix, ``a|k> = sqrt(k)|k-1>``."""
    if dim < 2:
        raise ValueError(f"Fock dimension must be >= 2, got {dim}")
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)


def realize(expr: OperatorExpr, dim: int) -> np.ndarray:
    """Dense ``dim x dim`` matrix of ``expr`` built from truncated ladder matrices.

    Products are taken of the truncated matrices themselves, so rows and
    columns within ``max_degree`` of the cutoff follow the truncated algebra
    rather than the exact infinite-space matrix elements.
    """
    a = annihilation(dim)
    ad = a.conj().T
    out = np.zeros((dim, dim), dtype=complex)
    for m, n, c in expr.terms:
        out += c * (np.linalg.matrix_power(ad, m) @ np.linalg.matrix_power(a, n))
    return out


def coherent_state(alpha: complex, dim: int) -> np.ndarray:
    """Glauber state truncated to ``dim`` levels and renormalized."""
    nbar = abs(alpha) ** 2
    if nbar > dim / 2:
        raise TruncationTooSmall(f"|alpha|^2 = {nbar:.3g} exceeds dim/2 = {dim / 2:.3g}")
    if nbar > dim / 4:
        warnings.warn(f"|alpha|^2 = {nbar:.3g} > dim/4: truncation error may be visible", stacklevel=2)
    k = np.arange(dim)
    if alpha == 0:
        psi = np.zeros(dim, dtype=complex)
        psi[0] = 1.0
        return psi
    # log-magnitudes avoid overflow of alpha^k / sqrt(k!)
    logmag = -nbar / 2 + k * math.log(abs(alpha)) - 0.5 * np.array([math.lgamma(j + 1) for j in k])
    psi = np.exp(logmag) * np.exp(1j * np.angle(alpha) * k)
    return psi / np.linalg.norm(psi)


def expect_normal_coherent(expr_left: OperatorExpr, expr_right: OperatorExpr, alpha: complex) -> complex:
    """Exact ``<alpha| X^dag Y |alpha>`` for normal-ordered X = expr_left, Y = expr_right.

    Uses ``a^p ad^q = sum_k k! C(p,k) C(q,k) ad^(q-k) a^(p-k)``; no truncation.
    """
    ac = complex(alpha).conjugate()
    total = 0j
    # X^dag = sum conj(c) ad^n a^m ; Y = sum d ad^q a^p
    for m, n, c in expr_left.terms:
        for q, p, d in expr_right.terms:
            # <alpha| ad^n (a^m ad^q) a^p |alpha> = ac^n alpha^p <a^m ad^q>
            inner = sum(
                math.factorial(k) * math.comb(m, k) * math.comb(q, k) * ac ** (q - k) * alpha ** (m - k)
                for k in range(min(m, q) + 1)
            )
            total += c.conjugate() * d * ac**n * alpha**p * inner
    return total
