"""Cylindrical Bessel functions of integer order.

J is computed by downward (Miller) recurrence normalized with 1 = J_0 + 2 sum J_2k, because
upward recurrence for J is unstable once the order exceeds the argument. Y_0 and Y_1 follow
from Neumann series in the J values, and higher orders of Y by upward recurrence, which is
stable for Y.
"""

import math
import operator
from functools import lru_cache

import numpy as np

from .constants import MAX_BESSEL_ARGUMENT, MAX_BESSEL_ORDER, ComplexArray, RealArray
from .errors import SpecialFunctionDomainError

_RESCALE_THRESHOLD = 1e200
_RESCALE_FACTOR = 1e-200
_EULER_GAMMA = 0.57721566490153286061


def _check_order(order: int) -> int:
    try:
        order = operator.index(order)
    except TypeError as error:
        msg = f"Bessel orders must be integers, got {order!r}."
        raise SpecialFunctionDomainError(msg) from error
    if abs(order) > MAX_BESSEL_ORDER:
        msg = f"|order| must be at most {MAX_BESSEL_ORDER}, got {order}."
        raise SpecialFunctionDomainError(msg)
    return order


def _check_argument(x: float, *, allow_zero: bool) -> float:
    x = float(x)
    if not math.isfinite(x) or x > MAX_BESSEL_ARGUMENT:
        msg = f"The argument must be finite and at most {MAX_BESSEL_ARGUMENT:g}, got {x}."
        raise SpecialFunctionDomainError(msg)
    if x < 0 or (x == 0 and not allow_zero):
        bound = "nonnegative" if allow_zero else "positive"
        msg = f"The argument must be {bound}, got {x}."
        raise SpecialFunctionDomainError(msg)
    return x


def _miller_start(order: int, x: float) -> int:
    """Even starting order for the downward recurrence."""
    reach = max(order, int(x)) + 1
    return 2 * ((reach + 20 + int(math.sqrt(160 * reach))) // 2)


@lru_cache(maxsize=256)
def _miller_values(order: int, x: float) -> tuple[float, ...]:
    """J_0(x) .. J_start(x) for x > 0, normalized."""
    start = _miller_start(order, x)
    values = [0.0] * (start + 1)
    two_over_x = 2.0 / x
    above, current = 0.0, 1.0
    values[start] = current
    # start is even, so J_start enters the normalization with weight 2.
    normalization = 2.0 * current
    for k in range(start, 0, -1):
        below = k * two_over_x * current - above
        above, current = current, below
        values[k - 1] = current
        if (k - 1) % 2 == 0:
            normalization += current if k == 1 else 2.0 * current
        if abs(current) > _RESCALE_THRESHOLD:
            above *= _RESCALE_FACTOR
            current *= _RESCALE_FACTOR
            normalization *= _RESCALE_FACTOR
            for index in range(k - 1, start + 1):
                values[index] *= _RESCALE_FACTOR
    return tuple(value / normalization for value in values)


def bessel_j_orders(order: int, x: float) -> RealArray:
    """J_0(x) .. J_order(x).

    Raises:
        SpecialFunctionDomainError: If `order` is negative or above the supported maximum,
            or `x` is negative, non finite or too large.
    """
    order = _check_order(order)
    if order < 0:
        msg = f"The highest order must be nonnegative, got {order}."
        raise SpecialFunctionDomainError(msg)
    x = _check_argument(x, allow_zero=True)
    if x == 0:
        values = np.zeros(order + 1)
        values[0] = 1.0
        return values
    return np.array(_miller_values(order, x)[: order + 1])


def bessel_y_orders(order: int, x: float) -> RealArray:
    """Y_0(x) .. Y_order(x) for x > 0.

    Raises:
        SpecialFunctionDomainError: If `order` is out of range, `x` is not positive, or
            |Y_order(x)| exceeds the largest double.
    """
    order = _check_order(order)
    if order < 0:
        msg = f"The highest order must be nonnegative, got {order}."
        raise SpecialFunctionDomainError(msg)
    x = _check_argument(x, allow_zero=False)
    j = _miller_values(max(order, 1), x)

    log_term = math.log(x / 2) + _EULER_GAMMA
    even_sum = 0.0
    odd_sum = 0.0
    for k in range(1, (len(j) - 1) // 2 + 1):
        sign = -1.0 if k % 2 else 1.0
        even_sum += sign * j[2 * k] / k
        if 2 * k + 1 < len(j):
            odd_sum += sign * (2 * k + 1) * j[2 * k + 1] / (k * (k + 1))

    values = np.empty(max(order, 1) + 1)
    values[0] = (2 / math.pi) * (log_term * j[0] - 2 * even_sum)
    values[1] = (2 / math.pi) * (-j[0] / x + (log_term - 1) * j[1] - odd_sum)
    if not np.all(np.isfinite(values[:2])):
        msg = f"Y_0({x}) or Y_1({x}) overflows a double."
        raise SpecialFunctionDomainError(msg)
    for n in range(1, order):
        value = (2 * n / x) * float(values[n]) - float(values[n - 1])
        if not math.isfinite(value):
            msg = f"Y_{n + 1}({x}) overflows a double; Y_{order} is not representable."
            raise SpecialFunctionDomainError(msg)
        values[n + 1] = value
    return values[: order + 1]


def hankel1_orders(order: int, x: float) -> ComplexArray:
    """H1_0(x) .. H1_order(x), with H1 = J + iY."""
    return bessel_j_orders(order, x) + 1j * bessel_y_orders(order, x)


def _reflect_order(order: int) -> tuple[int, float]:
    """|order| and the sign relating the negative order to it."""
    if order < 0 and order % 2:
        return -order, -1.0
    return abs(order), 1.0


def bessel_j(order: int, x: float) -> float:
    """J_order(x) for x >= 0, with J_-m = (-1)^m J_m."""
    order = _check_order(order)
    magnitude, sign = _reflect_order(order)
    return sign * float(bessel_j_orders(magnitude, x)[magnitude])


def bessel_y(order: int, x: float) -> float:
    """Y_order(x) for x > 0, with Y_-m = (-1)^m Y_m."""
    order = _check_order(order)
    magnitude, sign = _reflect_order(order)
    return sign * float(bessel_y_orders(magnitude, x)[magnitude])


def hankel1(order: int, x: float) -> complex:
    return complex(bessel_j(order, x), bessel_y(order, x))


def signed_orders(values: RealArray | ComplexArray) -> RealArray | ComplexArray:
    """Extend values for orders 0..N to orders -N..N using C_-m = (-1)^m C_m.

    Index `N + m` of the result holds order m.
    """
    top = len(values) - 1
    signs = np.where(np.arange(1, top + 1) % 2, -1.0, 1.0)
    negative = (signs * values[1:])[::-1]
    return np.concatenate([negative, values])
