"""Radial profiles and the 2.5D radial engine.

A :class:`RadialProfile` is a function of the cylindrical radius sampled on a
strictly increasing grid starting at r = 0, together with quadrature weights
for integrals of the form ``int f(r) r dr``.

The radial engine advances profiles under the radial heat equation

    d/dt h = h'' + h'/r                       (parity "even"),
    d/dt h = h'' + h'/r - h/r**2              (parity "odd"),

by Crank-Nicolson steps, second order in both dt and dr, with an optional
source term.  Even parity is the scalar (or vertical-component) radial
Laplacian and uses a Neumann axis cell; odd parity is the azimuthal-component
vector Laplacian and pins the axis value to zero.  The outer boundary value
is held fixed, which requires the data to have decayed at r = R; a
:class:`DomainTooSmallError` is raised otherwise.

Also here: the radial Biot-Savart formulas, the Oseen-extraction step, the
weighted L2_m norms for profiles, the pointwise bound envelopes, the Duhamel
quadrature oracle, and the heat-similarity (Kummer) profile with a prescribed
power-law tail.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import solve_banded
from scipy.special import hyp1f1

__all__ = [
    "RadialProfile",
    "DomainTooSmallError",
    "uniform_radii",
    "graded_radii",
    "radial_laplacian_banded",
    "step_radial",
    "run_radial",
    "radial_biot_savart",
    "oseen_extraction",
    "mean_vorticity_from_utheta",
    "zero_mass_check",
    "weighted_l2m_norm_profile",
    "profile_l2_norm_2d",
    "bound_envelopes",
    "BoundEnvelopeReport",
    "duhamel_gaussian_solution",
    "kummer_tail_profile",
]


class DomainTooSmallError(ValueError):
    """Raised when a profile has not decayed at the outer radius."""


def uniform_radii(R: float, n: int) -> np.ndarray:
    """n+1 equispaced radii on [0, R]."""
    return np.linspace(0.0, R, n + 1)


def graded_radii(R: float, n: int, power: float = 2.0) -> np.ndarray:
    """n+1 radii on [0, R] clustered near the axis (r_j = R (j/n)^power)."""
    return R * (np.arange(n + 1) / n) ** power


@dataclass
class RadialProfile:
    """Radial samples with trapezoid quadrature weights for ``int f r dr``."""

    r: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        self.r = np.asarray(self.r, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.r.ndim != 1 or self.r.size < 2:
            raise ValueError("radial grid must be a 1D array with >= 2 nodes")
        if self.r[0] != 0.0:
            raise ValueError("radial grid must start at r = 0")
        if np.any(np.diff(self.r) <= 0):
            raise ValueError("radial grid must be strictly increasing")
        if self.values.shape != self.r.shape:
            raise ValueError("values must match the radial grid shape")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("profile contains non-finite values")

    @property
    def weights(self) -> np.ndarray:
        """Trapezoid weights w_j such that sum(w_j f_j) ~ int f(r) r dr."""
        dr = np.diff(self.r)
        w = np.zeros_like(self.r)
        w[:-1] += dr / 2.0
        w[1:] += dr / 2.0
        return w * self.r

    def integrate_r_dr(self) -> float:
        """Trapezoid approximation of int values(r) r dr."""
        return float(np.trapezoid(self.values * self.r, self.r))

    def with_values(self, values: np.ndarray) -> "RadialProfile":
        return replace(self, values=np.asarray(values, dtype=float))

    def is_uniform(self, rtol: float = 1e-12) -> bool:
        dr = np.diff(self.r)
        return bool(np.all(np.abs(dr - dr[0]) <= rtol * dr[0]))


# --- Crank-Nicolson engine ---------------------------------------------------


def radial_laplacian_banded(r: np.ndarray, parity: str = "even") -> np.ndarray:
    """Tridiagonal radial Laplacian as rows (upper, diagonal, lower).

    Even parity uses the finite-volume form with the Neumann axis cell
    4 (h_1 - h_0) / dr^2; odd parity pins h(0) = 0 and adds the -1/r^2 term.
    The outer row is zero so the boundary value is held fixed.
    """
    n = r.size
    dr = r[1] - r[0]
    lo = np.zeros(n)
    di = np.zeros(n)
    up = np.zeros(n)
    j = np.arange(1, n - 1)
    if parity == "even":
        di[0] = -4.0 / dr**2
        up[0] = 4.0 / dr**2
        rp = r[j] + dr / 2.0
        rm = r[j] - dr / 2.0
        lo[j] = rm / (r[j] * dr**2)
        up[j] = rp / (r[j] * dr**2)
        di[j] = -(rp + rm) / (r[j] * dr**2)
    elif parity == "odd":
        lo[j] = 1.0 / dr**2 - 1.0 / (2.0 * r[j] * dr)
        up[j] = 1.0 / dr**2 + 1.0 / (2.0 * r[j] * dr)
        di[j] = -2.0 / dr**2 - 1.0 / r[j] ** 2
    else:
        raise ValueError(f"unknown parity {parity!r} (expected 'even' or 'odd')")
    return np.vstack([up, di, lo])


def _check_boundary(profile: RadialProfile, tol: float) -> None:
    scale = float(np.max(np.abs(profile.values)))
    if scale > 0 and abs(profile.values[-1]) > tol * scale:
        raise DomainTooSmallError(
            f"profile value {profile.values[-1]:.3e} at outer radius "
            f"R={profile.r[-1]:g} exceeds {tol:g} of the profile maximum; "
            "enlarge the radial domain"
        )


def step_radial(
    profile: RadialProfile,
    dt: float,
    source: np.ndarray | None = None,
    parity: str = "even",
    boundary_tol: float = 1e-6,
    _banded: np.ndarray | None = None,
) -> RadialProfile:
    """One Crank-Nicolson step of the radial heat equation.

    ``source``, if given, is the midpoint sample of the source term S(t + dt/2, r)
    (the sourced heat equation d/dt h = Lap h + S).  Second order in dt and dr.
    """
    if not profile.is_uniform():
        raise ValueError("the radial engine requires a uniform radial grid")
    _check_boundary(profile, boundary_tol)
    A = radial_laplacian_banded(profile.r, parity) if _banded is None else _banded
    up, di, lo = A
    h = profile.values
    rhs = h + 0.5 * dt * (
        np.concatenate(([0.0], lo[1:] * h[:-1]))
        + di * h
        + np.concatenate((up[:-1] * h[1:], [0.0]))
    )
    if source is not None:
        rhs = rhs + dt * np.asarray(source, dtype=float)
        rhs[-1] = h[-1]
    ab = np.zeros((3, h.size))
    ab[0, 1:] = -0.5 * dt * up[:-1]
    ab[1, :] = 1.0 - 0.5 * dt * di
    ab[2, :-1] = -0.5 * dt * lo[1:]
    return profile.with_values(solve_banded((1, 1), ab, rhs))


def run_radial(
    profile: RadialProfile,
    t_end: float,
    dt: float,
    source_fn=None,
    parity: str = "even",
    observer=None,
    observe_every: int = 1,
    boundary_tol: float = 1e-6,
) -> RadialProfile:
    """Advance a profile to t_end with fixed CN steps.

    ``source_fn(t_mid, r)``, if given, is evaluated at each midpoint time.
    ``observer(t, profile)`` is called after every ``observe_every``-th step.
    """
    nsteps = max(1, int(np.ceil(t_end / dt)))
    dt = t_end / nsteps
    banded = radial_laplacian_banded(profile.r, parity)
    _check_boundary(profile, boundary_tol)
    t = 0.0
    for k in range(nsteps):
        src = None if source_fn is None else source_fn(t + dt / 2.0, profile.r)
        profile = step_radial(
            profile, dt, source=src, parity=parity,
            boundary_tol=np.inf, _banded=banded,
        )
        t += dt
        if observer is not None and (k + 1) % observe_every == 0:
            observer(t, profile)
    return profile


# --- radial Biot-Savart and Oseen extraction ---------------------------------


def _cumtrap(y: np.ndarray, x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(y)
    out[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(x))
    return out


def _tail_estimate(values: np.ndarray, r: np.ndarray) -> float:
    """Estimated truncated tail of int_R^inf f dr assuming power decay."""
    f1, f0 = abs(values[-1]), abs(values[-2])
    if f1 == 0.0:
        return 0.0
    if f0 > f1 > 0:
        p = np.log(f0 / f1) / np.log(r[-1] / r[-2])
        if p > 1.0:
            return f1 * r[-1] / (p - 1.0)
    return f1 * r[-1]


def radial_biot_savart(
    w_theta: RadialProfile, w_z: RadialProfile, tail_tol: float = 1e-8
) -> tuple[RadialProfile, RadialProfile]:
    """Mean-part Biot-Savart: profiles (u_theta, u_z) from (w_theta, w_z).

    u_theta(r) = (1/r) int_0^r w_z rho drho   (0 at the axis),
    u_z(r)     = int_r^inf w_theta drho       (tail beyond R estimated by a
    power-law fit of the last two samples; a warning reports the estimate
    when it is not negligible).
    """
    if not np.array_equal(w_theta.r, w_z.r):
        raise ValueError("w_theta and w_z must share a radial grid")
    r = w_z.r
    integ = _cumtrap(w_z.values * r, r)
    u_theta = np.zeros_like(integ)
    u_theta[1:] = integ[1:] / r[1:]
    full = _cumtrap(w_theta.values, r)
    tail = _tail_estimate(w_theta.values, r)
    u_z = (full[-1] - full) + tail
    scale = float(np.max(np.abs(w_theta.values))) * r[-1]
    if tail > tail_tol * max(scale, 1e-300):
        warnings.warn(
            f"radial Biot-Savart: w_theta tail beyond R={r[-1]:g} contributes "
            f"an estimated {tail:.3e} to u_z",
            stacklevel=2,
        )
    return w_theta.with_values(u_theta), w_theta.with_values(u_z)


def oseen_extraction(
    u_theta: RadialProfile, a: float, spread: float = 1.0
) -> RadialProfile:
    """Subtract the circulation-carrying Oseen tail from u_theta.

    v_theta(r) = u_theta(r) - (a/(2 pi r)) (1 - e^{-r^2/(4 spread)}); the
    result is the square-integrable azimuthal remainder.  ``spread = 1``
    subtracts the unit-core vortex; larger values match a background already
    diffused to core spread ``1 + t``.
    """
    if spread <= 0:
        raise ValueError("core spread must be positive")
    r = u_theta.r
    rsafe = np.where(r > 0, r, 1.0)
    oseen = np.where(
        r > 0,
        (1.0 - np.exp(-(rsafe**2) / (4.0 * spread))) / (2.0 * np.pi * rsafe),
        0.0,
    )
    return u_theta.with_values(u_theta.values - a * oseen)


def mean_vorticity_from_utheta(
    w_z: RadialProfile, a: float, spread: float = 1.0
) -> RadialProfile:
    """Zero-mass vertical vorticity w_z - (a/(4 pi spread)) e^{-r^2/(4 spread)}."""
    if spread <= 0:
        raise ValueError("core spread must be positive")
    gauss = np.exp(-(w_z.r**2) / (4.0 * spread)) / (4.0 * np.pi * spread)
    return w_z.with_values(w_z.values - a * gauss)


def zero_mass_check(w_z_bar: RadialProfile) -> tuple[np.ndarray, np.ndarray]:
    """Forward and backward Biot-Savart integrals of a zero-mass profile.

    Returns (forward, backward) where forward(r) = (1/r) int_0^r w rho drho and
    backward(r) = -(1/r) int_r^R w rho drho.  For a profile of zero total mass
    the two agree at every radius, certifying int_0^inf w r dr = 0.
    """
    r = w_z_bar.r
    integ = _cumtrap(w_z_bar.values * r, r)
    fwd = np.zeros_like(integ)
    fwd[1:] = integ[1:] / r[1:]
    bwd = np.zeros_like(integ)
    bwd[1:] = -(integ[-1] - integ[1:]) / r[1:]
    return fwd, bwd


# --- weighted norms ----------------------------------------------------------


def weighted_l2m_norm_profile(
    profile: RadialProfile, m: float, pitch: float
) -> float:
    """L2_m(box) norm of a radial profile: (int (1+r^2)^m f^2 r dr dtheta dz)^(1/2)."""
    if m < 0:
        raise ValueError("weight exponent m must be >= 0")
    integrand = (1.0 + profile.r**2) ** m * profile.values**2
    val = float(np.trapezoid(integrand * profile.r, profile.r))
    return float(np.sqrt(2.0 * np.pi * 2.0 * np.pi * pitch * val))


def profile_l2_norm_2d(profile: RadialProfile) -> float:
    """Plane L2 norm per unit height: (2 pi int f^2 r dr)^(1/2)."""
    return float(
        np.sqrt(2.0 * np.pi * np.trapezoid(profile.values**2 * profile.r, profile.r))
    )


# --- pointwise bound envelopes ------------------------------------------------


@dataclass
class BoundEnvelopeReport:
    """Fitted envelope constants for the mean-part velocity bounds."""

    m: float
    C3: float
    C4: float
    max_ratio_uz: float
    max_ratio_vtheta: float


def bound_envelopes(
    w_theta: RadialProfile, w_z: RadialProfile, m: float, pitch: float
) -> BoundEnvelopeReport:
    """Fit the pointwise envelopes of the mean-part velocities.

    Checks |u_z(r)| <= C3 ||w_theta||_{L2_m} (1 + ln_+(1/r)^(1/2)) / (1+r)^m
    and r |v_theta(r)| <= C4 r ||w_z_bar||_{L2_m} / (1+r)^m, where w_z_bar is
    the zero-mass part of w_z.  The fitted constants are the max ratios over
    the radial grid (reported, never asserted against fixed values).
    """
    if m <= 1.0:
        raise ValueError("bound envelopes require m > 1")
    u_theta, u_z = radial_biot_savart(w_theta, w_z)
    a = 2.0 * np.pi * w_z.integrate_r_dr()
    v_theta = oseen_extraction(u_theta, a)
    w_z_bar = mean_vorticity_from_utheta(w_z, a)

    r = w_z.r
    rpos = r[1:]
    ln_plus = np.maximum(np.log(1.0 / rpos), 0.0)
    norm_wth = weighted_l2m_norm_profile(w_theta, m, pitch)
    norm_wzb = weighted_l2m_norm_profile(w_z_bar, m, pitch)

    ratio_uz = np.zeros_like(rpos)
    if norm_wth > 0:
        envelope = norm_wth * (1.0 + np.sqrt(ln_plus)) / (1.0 + rpos) ** m
        ratio_uz = np.abs(u_z.values[1:]) / envelope
    ratio_vth = np.zeros_like(rpos)
    if norm_wzb > 0:
        envelope = rpos * norm_wzb / (1.0 + rpos) ** m
        ratio_vth = rpos * np.abs(v_theta.values[1:]) / envelope
    return BoundEnvelopeReport(
        m=m,
        C3=float(np.max(ratio_uz)),
        C4=float(np.max(ratio_vth)),
        max_ratio_uz=float(np.max(ratio_uz)),
        max_ratio_vtheta=float(np.max(ratio_vth)),
    )


# --- oracles -------------------------------------------------------------------


def duhamel_gaussian_solution(
    t: float, r: np.ndarray, sigma0: float = 1.0, decay: float = 1.0,
    amplitude: float = 1.0, nodes: int = 64,
) -> np.ndarray:
    """Closed-kernel Duhamel solution of the sourced radial heat equation.

    Solves d/dt h = Lap_r h + S from h(0) = 0 with
    S(t, r) = amplitude * e^{-decay t} e^{-r^2/(4 sigma0)} / (4 pi sigma0),
    using the exact propagated-Gaussian kernel and Gauss-Legendre quadrature
    in the time variable.
    """
    x, w = np.polynomial.legendre.leggauss(nodes)
    tau = 0.5 * t * (x + 1.0)
    wts = 0.5 * t * w
    r = np.asarray(r, dtype=float)
    spread = sigma0 + (t - tau)
    kernels = np.exp(-(r[:, None] ** 2) / (4.0 * spread)) / (4.0 * np.pi * spread)
    return amplitude * kernels @ (np.exp(-decay * tau) * wts)


def kummer_tail_profile(p: float, r: np.ndarray) -> np.ndarray:
    """Heat-similarity profile with an r^{-p} tail and zero total mass.

    M(p/2, 1, -r^2/4) evolves under the radial heat equation exactly as
    (1+t)^{-p/2} M(p/2, 1, -xi^2/4) with xi = r / sqrt(1+t), so any norm of
    its Biot-Savart velocity follows a pure power of (1+t).
    """
    if p <= 2.0:
        raise ValueError("tail exponent p must exceed 2 for an integrable profile")
    return hyp1f1(p / 2.0, 1.0, -(np.asarray(r, dtype=float) ** 2) / 4.0)
