"""Truncated formal power series in the deformation parameter.

A series holds exact coefficients for lambda^0 .. lambda^N and silently
forgets everything above N.  All binary operations demand equal truncation
orders; re-truncation is always explicit via ``truncate``.
"""

from __future__ import annotations

from fractions import Fraction

from .coefficients import (
    CoefficientError,
    GR_ZERO,
    GaussianRational,
    coeff_eq,
    conjugate as coeff_conjugate,
    is_zero as coeff_is_zero,
)


class SeriesError(CoefficientError):
    pass


class OrderMismatchError(SeriesError):
    pass


class SignError(SeriesError):
    pass


class FormalSeries:
    """Exact series sum(c_r * lambda^r, r = 0..order)."""

    __slots__ = ("order", "coeffs")

    def __init__(self, coeffs, order: int | None = None):
        coeffs = tuple(coeffs)
        if order is None:
            order = len(coeffs) - 1
        if len(coeffs) != order + 1:
            raise SeriesError(
                f"need {order + 1} coefficients, got {len(coeffs)}")
        self.order = order
        self.coeffs = coeffs

    @classmethod
    def const(cls, c, order: int) -> "FormalSeries":
        return cls((c,) + (GR_ZERO,) * order, order)

    @classmethod
    def zero(cls, order: int) -> "FormalSeries":
        return cls((GR_ZERO,) * (order + 1), order)

    @classmethod
    def lam(cls, order: int, power: int = 1) -> "FormalSeries":
        """The monomial lambda^power as a series."""
        if power > order:
            return cls.zero(order)
        return cls(tuple(GaussianRational(1) if r == power else GR_ZERO
                         for r in range(order + 1)), order)

    # -- ring structure ----------------------------------------------------

    def _check(self, other: "FormalSeries"):
        if not isinstance(other, FormalSeries):
            raise SeriesError("expected a FormalSeries operand")
        if other.order != self.order:
            raise OrderMismatchError(
                f"series orders differ: {self.order} vs {other.order}")

    def __add__(self, other):
        self._check(other)
        return FormalSeries(tuple(a + b for a, b in
                                  zip(self.coeffs, other.coeffs)), self.order)

    def __sub__(self, other):
        self._check(other)
        return FormalSeries(tuple(a - b for a, b in
                                  zip(self.coeffs, other.coeffs)), self.order)

    def __neg__(self):
        return FormalSeries(tuple(-a for a in self.coeffs), self.order)

    def __mul__(self, other):
        """Cauchy product with pointwise coefficient multiplication."""
        self._check(other)
        n = self.order
        out = []
        for r in range(n + 1):
            total = GR_ZERO
            for s in range(r + 1):
                a = self.coeffs[s]
                b = other.coeffs[r - s]
                if coeff_is_zero(a) or coeff_is_zero(b):
                    continue
                total = total + a * b
            out.append(total)
        return FormalSeries(tuple(out), n)

    def scale(self, c) -> "FormalSeries":
        """Multiply every coefficient by a fixed coefficient or scalar."""
        if isinstance(c, (int, Fraction)):
            c = GaussianRational(c)
        return FormalSeries(tuple(c * a for a in self.coeffs), self.order)

    def shift(self, k: int) -> "FormalSeries":
        """Multiply by lambda^k, truncating at the same order."""
        if k < 0:
            raise SeriesError("shift takes k >= 0")
        coeffs = (GR_ZERO,) * k + self.coeffs
        return FormalSeries(coeffs[: self.order + 1], self.order)

    def truncate(self, order: int) -> "FormalSeries":
        """Re-truncate; padding with zeros when the order grows."""
        if order < 0:
            raise SeriesError("truncation order must be >= 0")
        if order <= self.order:
            return FormalSeries(self.coeffs[: order + 1], order)
        return FormalSeries(
            self.coeffs + (GR_ZERO,) * (order - self.order), order)

    def conjugate(self) -> "FormalSeries":
        return FormalSeries(tuple(coeff_conjugate(a) for a in self.coeffs),
                            self.order)

    # -- inspection --------------------------------------------------------

    @property
    def classical_part(self):
        return self.coeffs[0]

    @property
    def is_zero(self) -> bool:
        return all(coeff_is_zero(a) for a in self.coeffs)

    def first_nonzero_order(self) -> int | None:
        for r, a in enumerate(self.coeffs):
            if not coeff_is_zero(a):
                return r
        return None

    def __eq__(self, other):
        if not isinstance(other, FormalSeries):
            return NotImplemented
        if other.order != self.order:
            return False
        return all(coeff_eq(a, b) for a, b in
                   zip(self.coeffs, other.coeffs))

    __hash__ = None

    def first_difference(self, other: "FormalSeries") -> int | None:
        """Lowest lambda-order where the two series differ, or None."""
        self._check(other)
        for r, (a, b) in enumerate(zip(self.coeffs, other.coeffs)):
            if not coeff_eq(a, b):
                return r
        return None

    def __repr__(self):
        return f"FormalSeries({[str(c) for c in self.coeffs]})"


def series_sign(f: FormalSeries) -> int:
    """Sign by the first nonvanishing coefficient.

    Defined for series whose coefficients are real constants; the sign of
    the zero series is 0.
    """
    for a in f.coeffs:
        if isinstance(a, (int, Fraction)):
            a = GaussianRational(a)
        if not isinstance(a, GaussianRational):
            if a.is_constant:
                a = a.constant_value()
            else:
                raise SignError("series coefficients are not constants")
        if not a.is_real:
            raise SignError("series coefficients are not real")
        if a.re:
            return 1 if a.re > 0 else -1
    return 0


def series_compare(f: FormalSeries, g: FormalSeries) -> int:
    """Total order induced by series_sign of the difference."""
    return series_sign(f - g)
