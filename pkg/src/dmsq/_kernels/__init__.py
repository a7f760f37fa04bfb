"""Backend selection for the covariance-ODE stepping kernel.

The compiled Cython kernel is used when importable; otherwise the
pure-numpy implementation with identical stepping semantics takes over.
Set ``DMSQ_KERNEL=pure`` to force the fallback.
"""

import os

from . import pure as _pure

BACKEND = "pure"
_impl = _pure

if os.environ.get("DMSQ_KERNEL", "").lower() != "pure":
    try:
        from . import _rk4 as _compiled

        BACKEND = "cython"
        _impl = _compiled
    except ImportError:
        pass


def rk4_steady_state(a, q, v0, h, tol, max_steps):
    """Advance dV/dt = A V + V A^T + Q by fixed-step RK4 until the
    derivative's Frobenius norm drops below ``tol``.

    Returns ``(v, steps, residual, converged)``. The convergence test uses
    the first stage of the next step, so it costs nothing and a V0 that is
    already stationary is returned unchanged after zero steps.
    """
    return _impl.rk4_steady_state(a, q, v0, h, tol, max_steps)
