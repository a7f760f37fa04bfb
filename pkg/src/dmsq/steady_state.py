"""Dynamical stability and steady-state covariance of the linear model.

Two independent routes to the stationary covariance are provided: a direct
dense solve of the Lyapunov equation A V + V A^T = -Q, and brute-force
time integration of dV/dt = A V + V A^T + Q to its fixed point. They share
no solver code, so their agreement is a meaningful cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numpy.typing import NDArray

from . import _kernels
from .errors import (
    EigensolverError,
    LyapunovResidualError,
    OdeConvergenceError,
    UnstableSystemError,
)
from .model import DriftMatrix, NoiseMatrix

# Margin below which a system is treated as unstable (in units of kappa):
# at the margin the Lyapunov solution diverges, so "marginal" is refused.
STABILITY_EPS = 1e-12

ROUTH_MAX_DIM = 12

_ODE_STEP_SAFETY = 0.01        # step = safety / spectral radius
_ODE_BUDGET_CAP = 100_000_000


def _raw(m) -> NDArray[np.float64]:
    return np.asarray(getattr(m, "matrix", m), dtype=float)


def _kappa_scale(m) -> float:
    return float(getattr(m, "kappa", 1.0))


@dataclass(frozen=True)
class StabilityReport:
    stable: bool
    eigenvalues: NDArray[np.complex128]
    margin: float  # max real part; stable iff margin < -eps


def is_stable(a: DriftMatrix | NDArray, eps: float | None = None) -> StabilityReport:
    """Eigenvalue stability test: all real parts strictly below ``-eps``.

    ``eps`` defaults to ``STABILITY_EPS`` times the drift matrix's kappa
    scale. Eigenvalue-solver failure raises ``EigensolverError`` and is
    never reported as "unstable".
    """
    mat = _raw(a)
    if eps is None:
        eps = STABILITY_EPS * _kappa_scale(a)
    try:
        ev = np.linalg.eigvals(mat)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"eigenvalue computation failed: {exc}") from exc
    margin = float(ev.real.max())
    return StabilityReport(stable=margin < -eps, eigenvalues=ev, margin=margin)


def _exact_char_poly(mat: NDArray) -> list[Fraction]:
    """Characteristic polynomial coefficients [1, c1, ..., cn], exactly.

    The float entries are scaled to integers (floats are dyadic rationals),
    the Faddeev-LeVerrier recursion runs in integer arithmetic, and the
    scaling is undone on the coefficients.
    """
    n = mat.shape[0]
    fracs = [[Fraction(float(x)) for x in row] for row in mat]
    denom = 1
    for row in fracs:
        for x in row:
            denom = denom * x.denominator // math.gcd(denom, x.denominator)
    a = [[int(x * denom) for x in row] for row in fracs]

    # Recursion in the scaled variables m_k = M_k * denom^k and
    # c^_k = c_k * denom^k, which stay integer throughout.
    mk = [[0] * n for _ in range(n)]
    ck_scaled = 1
    coeffs = [Fraction(1)]
    for k in range(1, n + 1):
        for i in range(n):
            mk[i][i] += ck_scaled
        mk = [[sum(a[i][t] * mk[t][j] for t in range(n)) for j in range(n)]
              for i in range(n)]
        trace = sum(mk[i][i] for i in range(n))
        ck_scaled, rem = divmod(-trace, k)
        if rem:
            raise AssertionError("Faddeev-LeVerrier division must be exact")
        coeffs.append(Fraction(ck_scaled, denom ** k))
    return coeffs


def routh_hurwitz_check(a: DriftMatrix | NDArray) -> bool:
    """Routh-Hurwitz verdict on the drift matrix, in exact arithmetic.

    Marginal tables (a zero in the first column) are reported as unstable,
    so the verdict matches ``is_stable`` whenever the spectrum is clear of
    the imaginary axis. Dimensions above ``ROUTH_MAX_DIM`` are refused;
    use ``is_stable`` there.
    """
    mat = _raw(a)
    n = mat.shape[0]
    if n > ROUTH_MAX_DIM:
        raise ValueError(
            f"Routh-Hurwitz check supports dim <= {ROUTH_MAX_DIM}, got {n}; use is_stable"
        )
    coeffs = _exact_char_poly(mat)
    if any(c <= 0 for c in coeffs[1:]):
        return False

    width = (n + 2) // 2
    row_prev = [coeffs[i] if i < n + 1 else Fraction(0) for i in range(0, n + 1, 2)]
    row_cur = [coeffs[i] if i < n + 1 else Fraction(0) for i in range(1, n + 1, 2)]
    row_prev += [Fraction(0)] * (width - len(row_prev))
    row_cur += [Fraction(0)] * (width - len(row_cur))
    for _ in range(n - 1):
        if row_cur[0] <= 0:
            # zero: marginal/singular table, treated as unstable;
            # negative: sign change, unstable outright
            return False
        nxt = [
            (row_cur[0] * row_prev[j + 1] - row_prev[0] * row_cur[j + 1]) / row_cur[0]
            for j in range(width - 1)
        ] + [Fraction(0)]
        row_prev, row_cur = row_cur, nxt
    return row_cur[0] > 0


@dataclass(frozen=True)
class CovarianceMatrix:
    """Symmetric steady-state covariance in the fixed quadrature ordering."""

    matrix: NDArray[np.float64]
    n_mech: int

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def _infer_n_mech(a, dim: int) -> int:
    return int(getattr(a, "n_mech", dim // 2 - 1))


def solve_lyapunov(
    a: DriftMatrix | NDArray,
    q: NoiseMatrix | NDArray,
    residual_tol: float = 1e-10,
) -> CovarianceMatrix:
    """Solve A V + V A^T = -Q for the steady-state covariance.

    The system is small (dim <= ~22), so up to dim 64 the Kronecker-lifted
    linear system is solved by dense LU; beyond that scipy's
    Bartels-Stewart solver takes over. The result is symmetrized and the
    relative residual ||A V + V A^T + Q||_F / ||Q||_F must meet
    ``residual_tol``.

    Raises
    ------
    UnstableSystemError
        If the drift matrix is not strictly stable (no stationary state).
    LyapunovResidualError
        If the solve is too ill-conditioned to meet the tolerance.
    """
    amat = _raw(a)
    qmat = _raw(q)
    d = amat.shape[0]
    if qmat.shape != (d, d):
        raise ValueError(f"shape mismatch: A is {amat.shape}, Q is {qmat.shape}")
    report = is_stable(a)
    if not report.stable:
        raise UnstableSystemError(
            f"drift matrix is not stable (max Re eigenvalue = {report.margin:g}); "
            "no steady-state covariance exists"
        )

    if d <= 64:
        eye = np.eye(d)
        lifted = np.kron(eye, amat) + np.kron(amat, eye)
        v = np.linalg.solve(lifted, -qmat.reshape(-1)).reshape(d, d)
    else:
        from scipy.linalg import solve_continuous_lyapunov

        v = solve_continuous_lyapunov(amat, -qmat)
    v = 0.5 * (v + v.T)

    qnorm = float(np.linalg.norm(qmat))
    residual = float(np.linalg.norm(amat @ v + v @ amat.T + qmat))
    if qnorm > 0 and residual > residual_tol * qnorm:
        raise LyapunovResidualError(
            f"Lyapunov residual {residual:g} exceeds {residual_tol:g} * ||Q|| = "
            f"{residual_tol * qnorm:g}",
            residual=residual,
        )
    v.setflags(write=False)
    return CovarianceMatrix(matrix=v, n_mech=_infer_n_mech(a, d))


def thermal_initial_covariance(
    a: DriftMatrix | NDArray, q: NoiseMatrix | NDArray
) -> NDArray[np.float64]:
    """Decoupled starting guess: each quadrature at Q_ii / (-2 A_ii).

    For the physical model this is the thermal diagonal
    diag(nbar_l + 1/2, ..., 1/2, 1/2). Rows without local damping fall
    back to the vacuum value 1/2.
    """
    amat = _raw(a)
    qd = np.diag(_raw(q)).copy()
    ad = np.diag(amat)
    out = np.full(amat.shape[0], 0.5)
    damped = ad < 0
    out[damped] = qd[damped] / (-2.0 * ad[damped])
    return np.diag(out)


def integrate_covariance_ode(
    a: DriftMatrix | NDArray,
    q: NoiseMatrix | NDArray,
    v0: NDArray | None = None,
    tol: float = 1e-12,
    max_steps: int | None = None,
) -> CovarianceMatrix:
    """Integrate dV/dt = A V + V A^T + Q to its fixed point (oracle route).

    Classic fixed-step fourth-order Runge-Kutta with step
    0.01 / rho(A) (rho the spectral radius, which keeps the stiff cavity
    scale stable while the slow mechanical scale sets the horizon).
    Integration stops once ||dV/dt||_F < tol.

    ``max_steps`` defaults to four times the decay-rate estimate of the
    steps needed; exceeding the budget raises ``OdeConvergenceError``.
    """
    amat = _raw(a)
    qmat = _raw(q)
    report = is_stable(a)
    if not report.stable:
        raise UnstableSystemError(
            f"drift matrix is not stable (max Re eigenvalue = {report.margin:g}); "
            "covariance ODE has no fixed point"
        )
    rho = float(np.abs(report.eigenvalues).max())
    h = _ODE_STEP_SAFETY / rho

    if v0 is None:
        v0 = thermal_initial_covariance(amat, qmat)
    else:
        v0 = np.asarray(v0, dtype=float)

    if max_steps is None:
        r0 = float(np.linalg.norm(amat @ v0 + v0 @ amat.T + qmat))
        if r0 < tol:
            max_steps = 1
        else:
            est = math.log(r0 / tol) / (2.0 * abs(report.margin)) / h
            max_steps = int(4.0 * est) + 1000
            if max_steps > _ODE_BUDGET_CAP:
                raise OdeConvergenceError(
                    f"estimated {est:.3g} steps exceeds the budget cap "
                    f"{_ODE_BUDGET_CAP:g}; the system is too close to marginal "
                    "for the ODE route (pass max_steps explicitly to override)"
                )

    v, steps, residual, converged = _kernels.rk4_steady_state(
        amat, qmat, v0, h, tol, int(max_steps)
    )
    if not converged:
        raise OdeConvergenceError(
            f"covariance ODE not converged after {steps} steps "
            f"(||dV/dt|| = {residual:g} > tol = {tol:g})"
        )
    v = 0.5 * (v + v.T)
    v.setflags(write=False)
    return CovarianceMatrix(matrix=v, n_mech=_infer_n_mech(a, amat.shape[0]))
