"""System configuration and construction of the drift/noise matrices.

The model is a single cavity mode containing a degenerate parametric
amplifier (gain ``opa_gain``, phase ``opa_phase``), coupled by linearized
beam-splitter interactions of strength ``coupling[l]`` to ``n_mech``
mechanical modes. Neighbouring mechanical modes are connected by a
phonon-hopping chain whose link ``l`` has strength ``hop_strength[l]`` and
modulation phase ``hop_phase[l]``; the phases act as a synthetic gauge
field that controls bright/dark hybridization of the mechanical modes.

All rates are expressed in units of the cavity decay rate ``kappa`` unless
the config declares an absolute ``unit`` (a label only; no rescaling is
performed). Quadratures are ordered mechanically first,

    [X_b1, Y_b1, ..., X_bN, Y_bN, X_a, Y_a],

with X = (o^dag + o)/sqrt(2), Y = i(o^dag - o)/sqrt(2), so the vacuum
variance of every quadrature is 1/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from numpy.typing import NDArray

from .errors import ConfigError, FixedPointError

# Advisory (non-fatal) regime thresholds: the rotating-wave model assumes
# resolved sidebands and couplings/gain well below the mechanical frequency.
SIDEBAND_RATIO_MIN = 5.0
WEAK_COUPLING_FRACTION = 0.2

MODE_OPTICAL = "a"


def mechanical_mode_label(l: int) -> str:
    """Label of the l-th mechanical mode (0-based index -> 'b1', 'b2', ...)."""
    return f"b{l + 1}"


def mode_labels(n_mech: int) -> tuple[str, ...]:
    """All mode labels in quadrature order: mechanical modes, then the cavity."""
    return tuple(mechanical_mode_label(l) for l in range(n_mech)) + (MODE_OPTICAL,)


def quadrature_index(mode: str, quad: str, n_mech: int) -> int:
    """Row/column of a named quadrature in the fixed ordering.

    ``mode`` is 'b1'...'bN' or 'a'; ``quad`` is 'X' or 'Y'.
    """
    q = quad.upper()
    if q not in ("X", "Y"):
        raise ValueError(f"quadrature must be 'X' or 'Y', got {quad!r}")
    off = 0 if q == "X" else 1
    if mode == MODE_OPTICAL:
        return 2 * n_mech + off
    if mode.startswith("b"):
        try:
            l = int(mode[1:])
        except ValueError:
            raise ValueError(f"unknown mode id {mode!r}") from None
        if not 1 <= l <= n_mech:
            raise ValueError(f"mechanical mode {mode!r} out of range for N={n_mech}")
        return 2 * (l - 1) + off
    raise ValueError(f"unknown mode id {mode!r}")


@dataclass(frozen=True)
class SystemConfig:
    """Parameters of the linearized model, in units of ``kappa`` by default.

    Lists are stored as tuples; ``omega``, ``gamma``, ``coupling`` and
    ``nbar`` have one entry per mechanical mode, the hopping fields one per
    chain link (``n_mech - 1`` entries).
    """

    n_mech: int
    kappa: float
    omega: tuple[float, ...]
    gamma: tuple[float, ...]
    coupling: tuple[float, ...]
    nbar: tuple[float, ...]
    hop_strength: tuple[float, ...] = ()
    hop_phase: tuple[float, ...] = ()
    opa_gain: float = 0.0
    opa_phase: float = 0.0
    unit: str | None = None

    def __post_init__(self):
        for name in ("omega", "gamma", "coupling", "nbar", "hop_strength", "hop_phase"):
            object.__setattr__(self, name, tuple(float(x) for x in getattr(self, name)))
        object.__setattr__(self, "n_mech", int(self.n_mech))
        object.__setattr__(self, "kappa", float(self.kappa))
        object.__setattr__(self, "opa_gain", float(self.opa_gain))
        object.__setattr__(self, "opa_phase", float(self.opa_phase))

    @property
    def dim(self) -> int:
        """Dimension of the quadrature vector, 2*(n_mech + 1)."""
        return 2 * (self.n_mech + 1)

    def with_params(self, **kwargs) -> "SystemConfig":
        return replace(self, **kwargs)


@dataclass(frozen=True)
class ValidatedConfig:
    """A structurally valid config plus any regime advisories."""

    config: SystemConfig
    advisories: tuple[str, ...] = ()

    def __getattr__(self, name):
        return getattr(self.config, name)


def _as_config(cfg: "SystemConfig | ValidatedConfig") -> SystemConfig:
    return cfg.config if isinstance(cfg, ValidatedConfig) else cfg


def validate_config(cfg: SystemConfig) -> ValidatedConfig:
    """Check structural invariants; hard errors raise, regime issues advise.

    Raises
    ------
    ConfigError
        On list-length mismatches, nonpositive kappa/gamma/omega, or
        negative nbar/coupling/hopping/gain.
    """
    n = cfg.n_mech
    if n < 1:
        raise ConfigError(f"n_mech must be >= 1, got {n}")
    for name, want in (("omega", n), ("gamma", n), ("coupling", n), ("nbar", n),
                       ("hop_strength", n - 1), ("hop_phase", n - 1)):
        got = len(getattr(cfg, name))
        if got != want:
            raise ConfigError(f"field '{name}' has length {got}, expected {want} for n_mech={n}")
    if not cfg.kappa > 0:
        raise ConfigError(f"field 'kappa' must be positive, got {cfg.kappa}")
    for l, g in enumerate(cfg.gamma):
        if not g > 0:
            raise ConfigError(f"field 'gamma[{l}]' must be positive, got {g}")
    for l, w in enumerate(cfg.omega):
        if not w > 0:
            raise ConfigError(f"field 'omega[{l}]' must be positive, got {w}")
    for name in ("coupling", "nbar", "hop_strength"):
        for l, x in enumerate(getattr(cfg, name)):
            if x < 0:
                raise ConfigError(f"field '{name}[{l}]' must be nonnegative, got {x}")
    if cfg.opa_gain < 0:
        raise ConfigError(f"field 'opa_gain' must be nonnegative, got {cfg.opa_gain}")

    advisories = []
    for l, w in enumerate(cfg.omega):
        if w / cfg.kappa < SIDEBAND_RATIO_MIN:
            advisories.append(
                f"omega[{l}]/kappa = {w / cfg.kappa:g} < {SIDEBAND_RATIO_MIN:g}: "
                "outside the resolved-sideband regime assumed by the rotating-wave model"
            )
    for l, g in enumerate(cfg.coupling):
        if g >= WEAK_COUPLING_FRACTION * cfg.omega[l]:
            advisories.append(
                f"coupling[{l}] = {g:g} is not small against omega[{l}] = {cfg.omega[l]:g}: "
                "rotating-wave approximation may be inaccurate"
            )
    for l, w in enumerate(cfg.omega):
        if cfg.opa_gain >= WEAK_COUPLING_FRACTION * w:
            advisories.append(
                f"opa_gain = {cfg.opa_gain:g} is not small against omega[{l}] = {w:g}: "
                "rotating-wave approximation may be inaccurate"
            )
            break
    if any(w != cfg.omega[0] for w in cfg.omega):
        advisories.append(
            "mechanical frequencies are not degenerate: the resonance condition "
            "behind the rotating-wave model holds only approximately"
        )
    return ValidatedConfig(config=cfg, advisories=tuple(advisories))


@dataclass(frozen=True)
class DriftMatrix:
    """Real drift matrix A of du/dt = A u + noise, in the fixed ordering."""

    matrix: NDArray[np.float64]
    n_mech: int
    kappa: float
    ordering: tuple[str, ...]

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class NoiseMatrix:
    """Diagonal noise matrix Q of the steady-state Lyapunov equation."""

    matrix: NDArray[np.float64]
    n_mech: int

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def _ordering(n_mech: int) -> tuple[str, ...]:
    names = []
    for l in range(n_mech):
        names += [f"X_b{l + 1}", f"Y_b{l + 1}"]
    names += ["X_a", "Y_a"]
    return tuple(names)


def build_drift_matrix(cfg: "SystemConfig | ValidatedConfig") -> DriftMatrix:
    """Assemble the drift matrix of the linearized quadrature dynamics.

    Mechanical block: -gamma_l on both quadratures of mode l, plus for each
    chain link l<->l+1 the phase-dependent hopping sub-blocks

        rows of mode l:    [[ eta sin(th),  eta cos(th)],
                            [-eta cos(th),  eta sin(th)]]  acting on (X,Y)_{l+1}
        rows of mode l+1:  [[-eta sin(th),  eta cos(th)],
                            [-eta cos(th), -eta sin(th)]]  acting on (X,Y)_l

    Optical block: [[-(kappa - 2 Lambda cos(phi)), 2 Lambda sin(phi)],
                    [2 Lambda sin(phi), -(kappa + 2 Lambda cos(phi))]].

    Beam-splitter coupling: the mechanical rows carry +G_l Y_a / -G_l X_a
    and the optical rows the negative transpose of that block, so the
    coupling is excitation-conserving.
    """
    c = _as_config(cfg)
    n = c.n_mech
    d = c.dim
    a = np.zeros((d, d))

    for l in range(n):
        a[2 * l, 2 * l] = -c.gamma[l]
        a[2 * l + 1, 2 * l + 1] = -c.gamma[l]

    for l in range(n - 1):
        s = c.hop_strength[l] * math.sin(c.hop_phase[l])
        t = c.hop_strength[l] * math.cos(c.hop_phase[l])
        r, q = 2 * l, 2 * (l + 1)
        a[r, q] += s
        a[r, q + 1] += t
        a[r + 1, q] += -t
        a[r + 1, q + 1] += s
        a[q, r] += -s
        a[q, r + 1] += t
        a[q + 1, r] += -t
        a[q + 1, r + 1] += -s

    xo, yo = 2 * n, 2 * n + 1
    lam, phi = c.opa_gain, c.opa_phase
    a[xo, xo] = -(c.kappa - 2.0 * lam * math.cos(phi))
    a[xo, yo] = 2.0 * lam * math.sin(phi)
    a[yo, xo] = 2.0 * lam * math.sin(phi)
    a[yo, yo] = -(c.kappa + 2.0 * lam * math.cos(phi))

    for l in range(n):
        g = c.coupling[l]
        a[2 * l, yo] += g
        a[2 * l + 1, xo] += -g
        a[xo, 2 * l + 1] += g
        a[yo, 2 * l] += -g

    a.setflags(write=False)
    return DriftMatrix(matrix=a, n_mech=n, kappa=c.kappa, ordering=_ordering(n))


def build_noise_matrix(cfg: "SystemConfig | ValidatedConfig") -> NoiseMatrix:
    """Diagonal Q: gamma_l (2 nbar_l + 1) on each mechanical quadrature pair,
    kappa on both cavity quadratures."""
    c = _as_config(cfg)
    diag = np.empty(c.dim)
    for l in range(c.n_mech):
        diag[2 * l] = diag[2 * l + 1] = c.gamma[l] * (2.0 * c.nbar[l] + 1.0)
    diag[-2] = diag[-1] = c.kappa
    q = np.diag(diag)
    q.setflags(write=False)
    return NoiseMatrix(matrix=q, n_mech=c.n_mech)


@dataclass(frozen=True)
class PhysicalDriveConfig:
    """Pre-linearization description: bare couplings plus an explicit drive.

    Either ``detuning`` (cavity minus drive frequency) or both ``omega_c``
    and ``omega_L`` must be given. The drive amplitude is stored as
    magnitude and phase; only the magnitude affects the linearized
    couplings because the cavity amplitude's phase is absorbed by
    convention.
    """

    n_mech: int
    kappa: float
    omega: tuple[float, ...]
    gamma: tuple[float, ...]
    g_bare: tuple[float, ...]
    nbar: tuple[float, ...]
    drive_amplitude: float
    drive_phase: float = 0.0
    detuning: float | None = None
    omega_c: float | None = None
    omega_L: float | None = None
    hop_strength: tuple[float, ...] = ()
    hop_phase: tuple[float, ...] = ()
    opa_gain: float = 0.0
    opa_phase: float = 0.0
    unit: str | None = None

    def __post_init__(self):
        for name in ("omega", "gamma", "g_bare", "nbar", "hop_strength", "hop_phase"):
            object.__setattr__(self, name, tuple(float(x) for x in getattr(self, name)))
        if self.detuning is None:
            if self.omega_c is None or self.omega_L is None:
                raise ConfigError("either 'detuning' or both 'omega_c' and 'omega_L' are required")
            object.__setattr__(self, "detuning", float(self.omega_c) - float(self.omega_L))
        if not self.kappa > 0:
            raise ConfigError(f"field 'kappa' must be positive, got {self.kappa}")
        if self.drive_amplitude < 0:
            raise ConfigError("drive amplitude is a magnitude; fold signs into drive_phase")


@dataclass(frozen=True)
class DriveFixedPoint:
    """Classical steady state of the driven system."""

    photon_amplitude: float          # |<a>_ss|
    mech_amplitudes: tuple[complex, ...]
    effective_detuning: float        # Delta_c shifted by the static mechanical displacement
    iterations: int


def drive_fixed_point(
    drive: PhysicalDriveConfig,
    relaxation: float = 0.5,
    tol: float = 1e-12,
    max_iter: int = 10_000,
) -> DriveFixedPoint:
    """Solve the coupled classical fixed point of cavity and mechanics.

    Iterates x = |<a>_ss|^2 under damped substitution: the mechanical
    amplitudes solve a linear system at fixed x (radiation-pressure push
    plus hopping), the detuning shifts by twice the coupling-weighted real
    displacement, and x is re-evaluated from the driven-cavity Lorentzian.

    Raises
    ------
    FixedPointError
        If the iteration does not settle within ``max_iter`` (strong drive
        near or beyond multistability).
    """
    n = drive.n_mech
    g = np.asarray(drive.g_bare)
    omega2 = drive.drive_amplitude ** 2
    # hopping matrix of the mechanical amplitude equations
    hop = np.zeros((n, n), dtype=complex)
    for l in range(n - 1):
        hop[l, l + 1] = drive.hop_strength[l] * np.exp(1j * drive.hop_phase[l])
        hop[l + 1, l] = drive.hop_strength[l] * np.exp(-1j * drive.hop_phase[l])
    lhs0 = np.diag(np.asarray(drive.gamma) + 1j * np.asarray(drive.omega)) + 1j * hop

    def mech_and_detuning(x: float) -> tuple[NDArray[np.complex128], float]:
        b = np.linalg.solve(lhs0, -1j * g * x)
        return b, drive.detuning + 2.0 * float(np.sum(g * b.real))

    x = omega2 / (drive.kappa ** 2 + drive.detuning ** 2)
    for it in range(1, max_iter + 1):
        b, delta = mech_and_detuning(x)
        x_new = omega2 / (drive.kappa ** 2 + delta ** 2)
        if abs(x_new - x) <= tol * max(1.0, abs(x)):
            b, delta = mech_and_detuning(x_new)
            return DriveFixedPoint(
                photon_amplitude=math.sqrt(x_new),
                mech_amplitudes=tuple(b),
                effective_detuning=delta,
                iterations=it,
            )
        x = (1.0 - relaxation) * x + relaxation * x_new
    raise FixedPointError(
        f"drive fixed point did not converge within {max_iter} iterations "
        "(drive too strong / multistable regime?)"
    )


def linearize_from_drive(drive: PhysicalDriveConfig) -> SystemConfig:
    """Reduce a driven configuration to the linearized ``SystemConfig``.

    The linearized coupling of mode l is g_l |<a>_ss|; the cavity amplitude
    is made real by the drive-phase convention, so couplings inherit the
    sign of g_l (nonnegative here).
    """
    fp = drive_fixed_point(drive)
    coupling = tuple(gl * fp.photon_amplitude for gl in drive.g_bare)
    return SystemConfig(
        n_mech=drive.n_mech,
        kappa=drive.kappa,
        omega=drive.omega,
        gamma=drive.gamma,
        coupling=coupling,
        nbar=drive.nbar,
        hop_strength=drive.hop_strength,
        hop_phase=drive.hop_phase,
        opa_gain=drive.opa_gain,
        opa_phase=drive.opa_phase,
        unit=drive.unit,
    )
