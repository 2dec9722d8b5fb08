"""Explicit Runge-Kutta integrators for complex-valued, batched linear ODEs.

``dopri54`` advances a stack of independent systems (one per column) with a
common step size chosen from the worst member, so a whole contour of spectral
parameters is integrated in one pass.
"""

from __future__ import annotations

import numpy as np

from .errors import ConvergenceError

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B_LOW = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)
_E = _B - _B_LOW


def dopri54(f, t0, y0, t1, rtol=1e-10, atol=1e-12, h0=None, max_steps=200_000):
    """Integrate y' = f(t, y) from t0 to t1 and return (y(t1), last step size).

    ``y0`` may have any shape; error control uses the max norm over all entries.
    Integration backwards (t1 < t0) is supported.
    """
    y = np.array(y0, dtype=complex)
    t = float(t0)
    span = float(t1) - t
    if span == 0.0:
        return y, h0
    direction = np.sign(span)
    h = abs(h0) if h0 else abs(span) / 50.0
    h = min(h, abs(span))
    k1 = f(t, y)
    for _ in range(max_steps):
        remaining = abs(float(t1) - t)
        if remaining <= 1e-15 * max(1.0, abs(t)):
            return y, h
        last = h >= remaining
        if last:
            h = remaining
        hs = direction * h
        ks = [k1]
        for i in range(1, 7):
            yi = y + hs * sum(a * k for a, k in zip(_A[i], ks))
            ks.append(f(t + _C[i] * hs, yi))
        y_new = y + hs * sum(b * k for b, k in zip(_B[:6], ks[:6]))
        err = hs * sum(e * k for e, k in zip(_E, ks) if e != 0.0)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err_norm = float(np.max(np.abs(err) / scale))
        if err_norm <= 1.0:
            t = float(t1) if last else t + hs
            y = y_new
            k1 = ks[6]
            fac = 5.0 if err_norm == 0.0 else min(5.0, 0.9 * err_norm ** (-0.2))
            h = h * fac
        else:
            h = h * max(0.2, 0.9 * err_norm ** (-0.2))
        if h < 1e-13 * max(1.0, abs(t)):
            raise ConvergenceError(f"step-size underflow at t={t:.6g}", last=t)
    raise ConvergenceError("max_steps exceeded", last=t)


def dopri54_dense(f, t0, y0, t_eval, rtol=1e-10, atol=1e-12):
    """Solution values at the monotone sequence t_eval, integrating piecewise from t0."""
    out = []
    y = np.array(y0, dtype=complex)
    t = float(t0)
    h = None
    for te in t_eval:
        y, h = dopri54(f, t, y, te, rtol=rtol, atol=atol, h0=h)
        t = float(te)
        out.append(y.copy())
    return np.array(out)


def rk4_step(f, t, y, h):
    """One classical fourth-order Runge-Kutta step."""
    k1 = f(t, y)
    k2 = f(t + h / 2, y + h / 2 * k1)
    k3 = f(t + h / 2, y + h / 2 * k2)
    k4 = f(t + h, y + h * k3)
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
