import math

import numpy as np
import pytest

from thermo.dual import Dual, exp, log, value_of


def test_variable_is_seeded():
    x = Dual.variable(2.0, 1, 3)
    assert x.val == 2.0
    assert list(x.grad) == [0.0, 1.0, 0.0]


def test_product_and_quotient_rules():
    x = Dual.variable(3.0, 0, 2)
    y = Dual.variable(4.0, 1, 2)
    product = x * y
    assert product.val == 12.0
    assert list(product.grad) == [4.0, 3.0]
    quotient = x / y
    assert quotient.val == pytest.approx(0.75)
    assert quotient.grad == pytest.approx([1 / 4, -3 / 16])


def test_mixed_float_operations():
    x = Dual.variable(2.0, 0, 1)
    result = 1.0 - 3.0 * x + 4.0 / x
    assert result.val == pytest.approx(1.0 - 6.0 + 2.0)
    assert result.grad == pytest.approx([-3.0 - 1.0])


def test_exp_log_and_pow():
    x = Dual.variable(0.5, 0, 1)
    assert exp(x).grad == pytest.approx([math.exp(0.5)])
    assert log(x).grad == pytest.approx([2.0])
    assert (x**2.5).grad == pytest.approx([2.5 * 0.5**1.5])


def test_pow_at_zero_has_zero_gradient():
    x = Dual.variable(0.0, 0, 1)
    assert (x**1.5).val == 0.0
    assert list((x**1.5).grad) == [0.0]


def test_float_passthrough():
    assert exp(0.0) == 1.0
    assert log(1.0) == 0.0
    assert value_of(2) == 2.0
    assert value_of(Dual(3.0, np.zeros(1))) == 3.0


def test_comparisons_use_value():
    x = Dual.variable(1.0, 0, 1)
    assert x < 2.0
    assert x > Dual(0.5, np.ones(1))
    assert x >= 1.0
    assert x <= 1.0
