"""
taylor.py
~~~~~~~~~

Truncated Taylor series in time ("jets").

A vector field written with +, -, *, /, integer powers and the `sqrt`
below can be evaluated on jets. Feeding the flow's own Taylor
coefficients back into the field yields the time derivatives of any
measurement along the flow (the Lie derivatives) without differencing.
"""

import math

import numpy as np


class Jet:
    """ Power series c[0] + c[1] t + ... + c[K] t^K, truncated at K """

    # numpy scalars must defer to the reflected operators below
    __array_ufunc__ = None

    def __init__(self, coeffs):
        self.c = np.array(coeffs, dtype=float)

    @classmethod
    def constant(cls, value, order):
        c = np.zeros(order + 1)
        c[0] = value
        return cls(c)

    @property
    def order(self):
        return len(self.c) - 1

    def _lift(self, other):
        if isinstance(other, Jet):
            return other
        return Jet.constant(other, self.order)

    def __add__(self, other):
        if isinstance(other, Jet):
            return Jet(self.c + other.c)
        c = self.c.copy()
        c[0] += other
        return Jet(c)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Jet):
            return Jet(self.c - other.c)
        c = self.c.copy()
        c[0] -= other
        return Jet(c)

    def __rsub__(self, other):
        c = -self.c
        c[0] += other
        return Jet(c)

    def __neg__(self):
        return Jet(-self.c)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if isinstance(other, Jet):
            return Jet(np.convolve(self.c, other.c)[: len(self.c)])
        return Jet(self.c * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c / other)
        a, b = self.c, other.c
        if b[0] == 0.0:
            raise ZeroDivisionError("Series division by a jet vanishing at t=0")
        q = np.zeros_like(a)
        for k in range(len(a)):
            q[k] = (a[k] - np.dot(b[1:k + 1], q[k - 1::-1] if k else q[:0])) / b[0]
        return Jet(q)

    def __rtruediv__(self, other):
        return self._lift(other) / self

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise TypeError("Jets support non-negative integer powers only")
        result = Jet.constant(1.0, self.order)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def sqrt(self):
        a = self.c
        if a[0] <= 0.0:
            raise ValueError("Series square root needs a positive constant term")
        s = np.zeros_like(a)
        s[0] = math.sqrt(a[0])
        for k in range(1, len(a)):
            s[k] = (a[k] - np.dot(s[1:k], s[k - 1:0:-1])) / (2.0 * s[0])
        return Jet(s)

    def __repr__(self):
        return "Jet(%s)" % np.array2string(self.c, precision=6)


def sqrt(value):
    """ numpy.sqrt that also accepts jets """
    if isinstance(value, Jet):
        return value.sqrt()
    return np.sqrt(value)


def coefficient(value, k):
    """ k-th coefficient of a jet, or of a constant field component """
    if isinstance(value, Jet):
        return value.c[k]
    return float(value) if k == 0 else 0.0


def flow_coefficients(field, x0, order):
    """
    Taylor coefficients of the flow psi_t(x0) around t = 0.

    `field` maps a list of state components to a list of derivative
    components. Returns an (order+1, n) array X with
    psi_t(x0) = sum_k X[k] t^k + O(t^(order+1)).
    """
    x0 = np.asarray(x0, dtype=float)
    n = len(x0)
    coeffs = np.zeros((order + 1, n))
    coeffs[0] = x0
    for k in range(order):
        # coefficient k of field(jets) only sees coefficients 0..k
        jets = [Jet(coeffs[:, i]) for i in range(n)]
        derivative = field(jets)
        for i, d in enumerate(derivative):
            coeffs[k + 1, i] = coefficient(d, k) / (k + 1)
    return coeffs


def time_derivatives(field, x0, weights, count):
    """
    d^j/dt^j h(psi_t(x0)) at t = 0 for j = 0..count-1, with h(x) = weights . x
    """
    coeffs = flow_coefficients(field, x0, max(count - 1, 0))
    series = coeffs @ np.asarray(weights, dtype=float)
    return np.array([math.factorial(j) * series[j] for j in range(count)])
