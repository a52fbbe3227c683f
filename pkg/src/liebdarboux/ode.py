"""Adaptive Dormand-Prince 5(4) integrator for small complex systems.

Pure Python on lists of complex numbers.  The compiled kernel implements
the same tableau and step controller, so both backends take identical
step sequences up to rounding.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = (71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200,
                          22 / 525, -1 / 40)

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0


class IntegrationError(RuntimeError):
    pass


@dataclass
class OdeResult:
    y: list
    steps: int
    rejected: int


def _axpy(y, h, pairs):
    out = list(y)
    for c, k in pairs:
        hc = h * c
        for i in range(len(out)):
            out[i] += hc * k[i]
    return out


def dopri45(f: Callable[[float, list], list], x0: float, x1: float, y0: Sequence[complex],
            rtol: float = 1e-11, atol: float = 1e-13, h0: float | None = None,
            max_steps: int = 200_000) -> OdeResult:
    """Integrate ``y' = f(x, y)`` from ``x0`` to ``x1`` (either direction)."""
    y = [complex(v) for v in y0]
    n = len(y)
    span = x1 - x0
    if span == 0:
        return OdeResult(y, 0, 0)
    direction = 1.0 if span > 0 else -1.0
    h = direction * (abs(h0) if h0 else min(abs(span), 1e-2))
    x = x0
    k1 = f(x, y)
    steps = rejected = 0
    while direction * (x1 - x) > 0:
        if steps + rejected > max_steps:
            raise IntegrationError(f"step limit exceeded at x={x!r}")
        if direction * (x + h - x1) > 0:
            h = x1 - x
        k2 = f(x + C2 * h, _axpy(y, h, ((A21, k1),)))
        k3 = f(x + C3 * h, _axpy(y, h, ((A31, k1), (A32, k2))))
        k4 = f(x + C4 * h, _axpy(y, h, ((A41, k1), (A42, k2), (A43, k3))))
        k5 = f(x + C5 * h, _axpy(y, h, ((A51, k1), (A52, k2), (A53, k3), (A54, k4))))
        k6 = f(x + h, _axpy(y, h, ((A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5))))
        ynew = _axpy(y, h, ((B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)))
        k7 = f(x + h, ynew)
        acc = 0.0
        for i in range(n):
            e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
            sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
            acc += (abs(e) / sc) ** 2
        err = math.sqrt(acc / n)
        if err <= 1.0:
            x = x + h
            y = ynew
            k1 = k7
            steps += 1
            fac = MAX_FACTOR if err == 0 else min(MAX_FACTOR, SAFETY * err ** -0.2)
        else:
            rejected += 1
            fac = max(MIN_FACTOR, SAFETY * err ** -0.2)
        h = h * fac
        if abs(h) < 1e-14 * max(1.0, abs(x)):
            raise IntegrationError(f"step size underflow at x={x!r}")
    return OdeResult(y, steps, rejected)
