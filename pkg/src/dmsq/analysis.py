"""Squeezing degrees, uncertainty diagnostics, and bright/dark-mode analysis.

Squeezing is quoted in dB against the zero-point variance 1/2 of the
quadrature normalization X = (o^dag + o)/sqrt(2): positive dB means the
variance sits below vacuum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .model import (
    MODE_OPTICAL,
    SystemConfig,
    ValidatedConfig,
    _as_config,
    mode_labels,
    quadrature_index,
)
from .steady_state import CovarianceMatrix, StabilityReport

ZERO_POINT_VARIANCE = 0.5

# |G~_j| below this fraction of the largest bare coupling counts as dark.
DARK_MODE_TOL = 1e-8

PHYSICALITY_SLACK = 1e-10


def squeezing_degree(variance: float) -> float:
    """Squeezing in dB: -10 log10(variance / 0.5). Positive means squeezed."""
    if not variance > 0:
        raise ValueError(f"variance must be positive, got {variance}")
    # + 0.0 normalizes the negative zero that log10(1.0) would produce
    return -10.0 * float(np.log10(variance / ZERO_POINT_VARIANCE)) + 0.0


def quadrature_variance(v: CovarianceMatrix, mode: str, quad: str) -> float:
    """Diagonal element of V for the named mode ('b1'...'bN', 'a') and quadrature."""
    i = quadrature_index(mode, quad, v.n_mech)
    return float(v.matrix[i, i])


def symplectic_form(n_modes: int) -> NDArray[np.float64]:
    """Block-diagonal J with [[0, 1], [-1, 0]] per mode."""
    j = np.zeros((2 * n_modes, 2 * n_modes))
    for k in range(n_modes):
        j[2 * k, 2 * k + 1] = 1.0
        j[2 * k + 1, 2 * k] = -1.0
    return j


@dataclass(frozen=True)
class PhysicalityReport:
    """Uncertainty-principle diagnostics of a covariance matrix.

    ``symplectic_margin`` is the smallest eigenvalue of V + (i/2)J (must be
    >= -slack for a physical Gaussian state). Both the plain per-mode
    product var_x * var_y and the Robertson-Schrodinger form with the
    cross-covariance subtracted are reported; each must reach 1/4.
    """

    ok: bool
    symplectic_margin: float
    plain_products: tuple[float, ...]
    rs_products: tuple[float, ...]

    @property
    def worst_plain_product(self) -> float:
        return min(self.plain_products)

    @property
    def worst_rs_product(self) -> float:
        return min(self.rs_products)


def physicality_check(v: CovarianceMatrix | NDArray, slack: float = PHYSICALITY_SLACK) -> PhysicalityReport:
    """Diagnose whether V describes a physical Gaussian state (never raises)."""
    mat = np.asarray(getattr(v, "matrix", v), dtype=float)
    n_modes = mat.shape[0] // 2
    j = symplectic_form(n_modes)
    herm = mat + 0.5j * j
    sympl_margin = float(np.linalg.eigvalsh(herm).min())
    plain = []
    rs = []
    for k in range(n_modes):
        vx = mat[2 * k, 2 * k]
        vy = mat[2 * k + 1, 2 * k + 1]
        cxy = mat[2 * k, 2 * k + 1]
        plain.append(float(vx * vy))
        rs.append(float(vx * vy - cxy * cxy))
    ok = sympl_margin >= -slack and min(rs) >= 0.25 - slack
    return PhysicalityReport(
        ok=ok,
        symplectic_margin=sympl_margin,
        plain_products=tuple(plain),
        rs_products=tuple(rs),
    )


def cooperativity(cfg: SystemConfig | ValidatedConfig, l: int) -> float:
    """G_l^2 / (kappa gamma_l) for the l-th mechanical mode (0-based)."""
    c = _as_config(cfg)
    if not 0 <= l < c.n_mech:
        raise ValueError(f"mechanical mode index {l} out of range for N={c.n_mech}")
    return c.coupling[l] ** 2 / (c.kappa * c.gamma[l])


@dataclass(frozen=True)
class TwoModeClosedForm:
    """Two-mode hybridization parameters in closed form (defined for eta > 0)."""

    f: float
    h: float
    omega_f: float
    g_plus: complex
    g_minus: complex


@dataclass(frozen=True)
class NormalModeDecomposition:
    """Mechanical normal modes of the hopping chain.

    ``transform`` U maps normal-mode operators to the local ones,
    b_l = sum_j U[l, j] B_j, with eigenfrequencies ascending. The
    effective optomechanical couplings are G~_j = sum_l G_l U[l, j];
    a vanishing G~_j marks a dark mode. Degenerate eigenspaces are rotated
    so that their entire coupling sits on a single (bright) column, which
    makes the bright/dark split well defined also for eta = 0.
    """

    frequencies: NDArray[np.float64]
    transform: NDArray[np.complex128]
    couplings: NDArray[np.complex128]
    dark: tuple[bool, ...] | None
    closed_form: TwoModeClosedForm | None


def _brighten_clusters(
    freqs: NDArray, u: NDArray, g: NDArray
) -> NDArray[np.complex128]:
    """Within each degenerate eigenspace, rotate the basis so the coupling
    vector projects onto the first column only."""
    n = len(freqs)
    scale = max(1.0, float(np.abs(freqs).max()))
    gap = 1e-9 * scale
    gnorm = float(np.linalg.norm(g))
    u = u.copy()
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and freqs[stop] - freqs[stop - 1] <= gap:
            stop += 1
        k = stop - start
        if k > 1:
            block = u[:, start:stop]
            t = g @ block
            tnorm = float(np.linalg.norm(t))
            if gnorm > 0 and tnorm > 1e-14 * gnorm:
                w1 = t.conj() / tnorm
                basis = np.column_stack([w1, np.eye(k, dtype=complex)])
                w, _ = np.linalg.qr(basis)
                u[:, start:stop] = block @ w[:, :k]
        start = stop

    # deterministic column phases: largest-magnitude entry made real positive
    for j in range(n):
        idx = int(np.argmax(np.abs(u[:, j])))
        pivot = u[idx, j]
        if abs(pivot) > 0:
            u[:, j] *= pivot.conjugate() / abs(pivot)
    return u


def mechanical_normal_modes(cfg: SystemConfig | ValidatedConfig) -> NormalModeDecomposition:
    """Diagonalize the mechanical chain and attach effective couplings.

    The chain Hamiltonian matrix has omega_l on the diagonal and
    eta_l e^{i theta_l} on the super-diagonal. For N = 2 the closed-form
    hybridization parameters (f, h, omega_f) are evaluated as a cross-check
    whenever eta > 0 (omega_f vanishes with eta, so the closed form is
    singular there and the eigendecomposition stays normative).
    """
    c = _as_config(cfg)
    n = c.n_mech
    m = np.diag(np.asarray(c.omega, dtype=complex))
    for l in range(n - 1):
        m[l, l + 1] = c.hop_strength[l] * np.exp(1j * c.hop_phase[l])
        m[l + 1, l] = c.hop_strength[l] * np.exp(-1j * c.hop_phase[l])
    freqs, u = np.linalg.eigh(m)
    g = np.asarray(c.coupling, dtype=float)
    u = _brighten_clusters(freqs, u, g)
    couplings = g @ u

    gmax = float(g.max()) if n else 0.0
    dark = None
    if gmax > 0:
        dark = tuple(bool(abs(cj) < DARK_MODE_TOL * gmax) for cj in couplings)

    closed = None
    if n == 2 and c.hop_strength[0] > 0:
        eta = c.hop_strength[0]
        w1, w2 = c.omega
        omega_f = 0.5 * (w2 - w1 - np.sqrt((w1 - w2) ** 2 + 4.0 * eta**2))
        f = abs(omega_f) / np.sqrt(omega_f**2 + eta**2)
        h = eta * f / omega_f
        phase = np.exp(1j * c.hop_phase[0])
        closed = TwoModeClosedForm(
            f=float(f),
            h=float(h),
            omega_f=float(omega_f),
            g_plus=complex(f * g[0] - h * g[1] / phase),
            g_minus=complex(f * g[1] + h * g[0] * phase),
        )

    freqs.setflags(write=False)
    u.setflags(write=False)
    couplings.setflags(write=False)
    return NormalModeDecomposition(
        frequencies=freqs, transform=u, couplings=couplings, dark=dark, closed_form=closed
    )


def dark_mode_census(
    d: NormalModeDecomposition, tol: float = DARK_MODE_TOL
) -> list[int]:
    """Indices of normal modes with |G~_j| below ``tol`` times the largest
    effective coupling scale; empty list means every dark mode is broken.

    Raises
    ------
    ValueError
        If all couplings vanish (the census is undefined without a cavity
        coupling to measure darkness against).
    """
    if tol <= 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    scale = float(np.abs(d.couplings).max())
    if scale == 0.0:
        raise ValueError("all optomechanical couplings vanish; dark-mode census undefined")
    return [j for j, cj in enumerate(d.couplings) if abs(cj) < tol * scale]


def normal_mode_quadrature_transform(d: NormalModeDecomposition) -> NDArray[np.float64]:
    """Orthogonal-symplectic matrix T mapping local quadratures to
    normal-mode quadratures, x_B = T x (2N x 2N real)."""
    n = d.transform.shape[0]
    t = np.zeros((2 * n, 2 * n))
    for j in range(n):
        for l in range(n):
            re = d.transform[l, j].real
            im = d.transform[l, j].imag
            t[2 * j, 2 * l] = re
            t[2 * j, 2 * l + 1] = im
            t[2 * j + 1, 2 * l] = -im
            t[2 * j + 1, 2 * l + 1] = re
    return t


@dataclass(frozen=True)
class ModeReport:
    mode: str
    var_x: float
    var_y: float
    s_x_db: float
    s_y_db: float
    cooperativity: float | None  # mechanical modes only


@dataclass(frozen=True)
class SqueezingReport:
    """Per-mode variances and squeezing degrees for one steady state."""

    stable: bool
    modes: tuple[ModeReport, ...]

    def mode(self, label: str) -> ModeReport:
        for m in self.modes:
            if m.mode == label:
                return m
        raise KeyError(label)

    def as_dict(self) -> dict:
        return {
            "stable": self.stable,
            "modes": [
                {
                    "mode": m.mode,
                    "var_x": m.var_x,
                    "var_y": m.var_y,
                    "s_x_db": m.s_x_db,
                    "s_y_db": m.s_y_db,
                    "cooperativity": m.cooperativity,
                }
                for m in self.modes
            ],
        }


def squeezing_report(
    cfg: SystemConfig | ValidatedConfig,
    v: CovarianceMatrix,
    stability: StabilityReport,
) -> SqueezingReport:
    """Assemble the per-mode squeezing report from a steady-state covariance."""
    c = _as_config(cfg)
    reports = []
    for label in mode_labels(c.n_mech):
        vx = quadrature_variance(v, label, "X")
        vy = quadrature_variance(v, label, "Y")
        coop = None
        if label != MODE_OPTICAL:
            coop = cooperativity(c, int(label[1:]) - 1)
        reports.append(
            ModeReport(
                mode=label,
                var_x=vx,
                var_y=vy,
                s_x_db=squeezing_degree(vx),
                s_y_db=squeezing_degree(vy),
                cooperativity=coop,
            )
        )
    return SqueezingReport(stable=stability.stable, modes=tuple(reports))
