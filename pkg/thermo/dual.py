"""
Forward-mode automatic differentiation with dual numbers.

A Dual carries a value and a gradient vector, so a single evaluation of the
NRTL and vapor pressure expressions yields derivatives with respect to every
seeded variable at once. The helpers exp, log and value_of accept plain
floats too, so model code is written once for both cases.
"""

from __future__ import annotations

import math
from typing import Union

import numpy as np


class Dual:
    __slots__ = ("val", "grad")

    def __init__(self, val: float, grad: np.ndarray):
        self.val = float(val)
        self.grad = np.asarray(grad, dtype=float)

    @classmethod
    def variable(cls, val: float, index: int, size: int) -> Dual:
        """A seeded variable: unit gradient in position index."""
        grad = np.zeros(size)
        grad[index] = 1.0
        return cls(val, grad)

    @classmethod
    def constant(cls, val: float, size: int) -> Dual:
        return cls(val, np.zeros(size))

    def __repr__(self) -> str:
        return f"Dual({self.val!r}, {self.grad!r})"

    def __add__(self, other: Scalar) -> Dual:
        if isinstance(other, Dual):
            return Dual(self.val + other.val, self.grad + other.grad)
        return Dual(self.val + other, self.grad)

    __radd__ = __add__

    def __sub__(self, other: Scalar) -> Dual:
        if isinstance(other, Dual):
            return Dual(self.val - other.val, self.grad - other.grad)
        return Dual(self.val - other, self.grad)

    def __rsub__(self, other: float) -> Dual:
        return Dual(other - self.val, -self.grad)

    def __mul__(self, other: Scalar) -> Dual:
        if isinstance(other, Dual):
            return Dual(
                self.val * other.val, self.val * other.grad + other.val * self.grad
            )
        return Dual(self.val * other, self.grad * other)

    __rmul__ = __mul__

    def __truediv__(self, other: Scalar) -> Dual:
        if isinstance(other, Dual):
            return Dual(
                self.val / other.val,
                (self.grad * other.val - self.val * other.grad) / (other.val**2),
            )
        return Dual(self.val / other, self.grad / other)

    def __rtruediv__(self, other: float) -> Dual:
        return Dual(other / self.val, -other * self.grad / (self.val**2))

    def __neg__(self) -> Dual:
        return Dual(-self.val, -self.grad)

    def __pow__(self, power: float) -> Dual:
        if power == 0:
            return Dual(1.0, np.zeros_like(self.grad))
        if self.val == 0.0 and power > 1:
            return Dual(0.0, np.zeros_like(self.grad))
        return Dual(self.val**power, power * self.val ** (power - 1) * self.grad)

    def __lt__(self, other: Scalar) -> bool:
        return self.val < value_of(other)

    def __gt__(self, other: Scalar) -> bool:
        return self.val > value_of(other)

    def __le__(self, other: Scalar) -> bool:
        return self.val <= value_of(other)

    def __ge__(self, other: Scalar) -> bool:
        return self.val >= value_of(other)


Scalar = Union[float, Dual]


def value_of(x: Scalar) -> float:
    return x.val if isinstance(x, Dual) else float(x)


def exp(x: Scalar) -> Scalar:
    if isinstance(x, Dual):
        e = math.exp(x.val)
        return Dual(e, e * x.grad)
    return math.exp(x)


def log(x: Scalar) -> Scalar:
    if isinstance(x, Dual):
        return Dual(math.log(x.val), x.grad / x.val)
    return math.log(x)
