#!/usr/bin/env python3
"""
Adaptive Gauss-Legendre Quadrature for the Pfaffian Entropy Toolkit

Globally adaptive: the interval with the largest error estimate is halved
until the summed estimate meets the tolerance or the subdivision cap is
reached. The error of each interval is estimated by the difference between
the order-n rule and a rule of half the order.
"""

import heapq
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Tuple

import numpy as np

from thermo_errors import QuadratureError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error: float
    subdivisions: int
    evaluations: int
    reliable: bool

    def __add__(self, other: "QuadratureResult") -> "QuadratureResult":
        return QuadratureResult(self.value + other.value, self.error + other.error,
                                self.subdivisions + other.subdivisions,
                                self.evaluations + other.evaluations,
                                self.reliable and other.reliable)


EMPTY_RESULT = QuadratureResult(0.0, 0.0, 0, 0, True)


@lru_cache(maxsize=None)
def gauss_legendre_rule(order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1]"""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def _panel(func, a, b, order):
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    nodes, weights = gauss_legendre_rule(order)
    coarse_nodes, coarse_weights = gauss_legendre_rule(order // 2)
    fine = half * float(np.dot(weights, np.asarray(func(mid + half * nodes), dtype=float)))
    coarse = half * float(np.dot(coarse_weights, np.asarray(func(mid + half * coarse_nodes), dtype=float)))
    return fine, abs(fine - coarse), order + order // 2


def adaptive_gauss_legendre(func: Callable[[np.ndarray], np.ndarray], a: float, b: float,
                            rtol: float = 1e-10, atol: float = 1e-14, order: int = 15,
                            max_subdivisions: int = 2000) -> QuadratureResult:
    """
    Integrate a vectorized function over [a, b]

    Args:
        func (callable): Maps an array of abscissae to an array of values
        a, b (float): Interval end points (a > b integrates backwards)
        rtol (float): Relative tolerance on the total
        atol (float): Absolute floor of the tolerance
        order (int): Gauss-Legendre order (the estimate uses order // 2)
        max_subdivisions (int): Cap on interval halvings

    Returns:
        QuadratureResult: value, error estimate, subdivisions and a
        `reliable` flag that is False when the cap was reached first
    """
    if order < 2:
        raise QuadratureError(f"quadrature order must be at least 2, got {order}")
    if not (math.isfinite(a) and math.isfinite(b)):
        raise QuadratureError(f"integration limits must be finite: [{a}, {b}]")
    if a == b:
        return EMPTY_RESULT

    value, error, evaluations = _panel(func, a, b, order)
    heap = [(-error, a, b, value)]
    total_value, total_error = value, error
    subdivisions = 0
    while total_error > max(rtol * abs(total_value), atol):
        if subdivisions >= max_subdivisions:
            logger.warning("quadrature on [%g, %g] stopped at the subdivision cap "
                           "(error %.3g, value %.12g)", a, b, total_error, total_value)
            return QuadratureResult(total_value, total_error, subdivisions, evaluations, False)
        negative_error, left, right, panel_value = heapq.heappop(heap)
        middle = 0.5 * (left + right)
        total_value -= panel_value
        total_error += negative_error
        for lo, hi in ((left, middle), (middle, right)):
            part, part_error, cost = _panel(func, lo, hi, order)
            evaluations += cost
            total_value += part
            total_error += part_error
            heapq.heappush(heap, (-part_error, lo, hi, part))
        subdivisions += 1

    # re-sum to shed the drift of the running totals
    total_value = math.fsum(item[3] for item in heap)
    total_error = math.fsum(-item[0] for item in heap)
    if subdivisions:
        logger.debug("quadrature on [%g, %g]: %d subdivisions, error %.3g",
                     a, b, subdivisions, total_error)
    return QuadratureResult(total_value, total_error, subdivisions, evaluations, True)
