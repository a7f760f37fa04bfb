"""Pure-numpy RK4 stepping kernel (fallback backend)."""

import numpy as np


def rk4_steady_state(a, q, v0, h, tol, max_steps):
    a = np.ascontiguousarray(a, dtype=np.float64)
    q = np.ascontiguousarray(q, dtype=np.float64)
    v = np.array(v0, dtype=np.float64, copy=True)

    def deriv(m):
        w = a @ m
        return w + w.T + q

    half = 0.5 * h
    sixth = h / 6.0
    steps = 0
    while steps < max_steps:
        k1 = deriv(v)
        res = float(np.linalg.norm(k1))
        if res < tol:
            return v, steps, res, True
        k2 = deriv(v + half * k1)
        k3 = deriv(v + half * k2)
        k4 = deriv(v + h * k3)
        v += sixth * (k1 + 2.0 * (k2 + k3) + k4)
        steps += 1
    res = float(np.linalg.norm(deriv(v)))
    return v, steps, res, res < tol
