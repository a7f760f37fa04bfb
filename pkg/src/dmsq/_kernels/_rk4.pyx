# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled RK4 stepping kernel for the covariance ODE.

Semantics match ``pure.rk4_steady_state`` step for step: the convergence
residual is the Frobenius norm of the first stage, checked before each
step is applied.
"""

from libc.math cimport sqrt

import numpy as np


cdef void _deriv(const double[:, ::1] a, const double[:, ::1] q, const double[:, ::1] v,
                 double[:, ::1] w, double[:, ::1] out, int d) noexcept nogil:
    # out = A v + (A v)^T + Q, valid for symmetric v
    cdef int i, j, k
    cdef double s
    for i in range(d):
        for j in range(d):
            s = 0.0
            for k in range(d):
                s += a[i, k] * v[k, j]
            w[i, j] = s
    for i in range(d):
        for j in range(d):
            out[i, j] = w[i, j] + w[j, i] + q[i, j]


cdef double _frob(double[:, ::1] m, int d) noexcept nogil:
    cdef int i, j
    cdef double s = 0.0
    for i in range(d):
        for j in range(d):
            s += m[i, j] * m[i, j]
    return sqrt(s)


def rk4_steady_state(a, q, v0, double h, double tol, long max_steps):
    a = np.ascontiguousarray(a, dtype=np.float64)
    q = np.ascontiguousarray(q, dtype=np.float64)
    v_arr = np.array(v0, dtype=np.float64, copy=True)

    cdef const double[:, ::1] av = a
    cdef const double[:, ::1] qv = q
    cdef double[:, ::1] v = v_arr
    cdef int d = v.shape[0]

    scratch = np.empty((6, d, d))
    cdef double[:, ::1] w = scratch[0]
    cdef double[:, ::1] k1 = scratch[1]
    cdef double[:, ::1] k2 = scratch[2]
    cdef double[:, ::1] k3 = scratch[3]
    cdef double[:, ::1] k4 = scratch[4]
    cdef double[:, ::1] stage = scratch[5]

    cdef double half = 0.5 * h
    cdef double sixth = h / 6.0
    cdef double res = 0.0
    cdef long steps = 0
    cdef bint converged = 0
    cdef int i, j

    with nogil:
        while steps < max_steps:
            _deriv(av, qv, v, w, k1, d)
            res = _frob(k1, d)
            if res < tol:
                converged = 1
                break
            for i in range(d):
                for j in range(d):
                    stage[i, j] = v[i, j] + half * k1[i, j]
            _deriv(av, qv, stage, w, k2, d)
            for i in range(d):
                for j in range(d):
                    stage[i, j] = v[i, j] + half * k2[i, j]
            _deriv(av, qv, stage, w, k3, d)
            for i in range(d):
                for j in range(d):
                    stage[i, j] = v[i, j] + h * k3[i, j]
            _deriv(av, qv, stage, w, k4, d)
            for i in range(d):
                for j in range(d):
                    v[i, j] = v[i, j] + sixth * (
                        k1[i, j] + 2.0 * (k2[i, j] + k3[i, j]) + k4[i, j])
            steps += 1
        if not converged:
            _deriv(av, qv, v, w, k1, d)
            res = _frob(k1, d)
            converged = res < tol

    return v_arr, int(steps), float(res), bool(converged)
