"""Spectral operators on the periodic box.

Fields are represented as plain numpy arrays: physical scalar fields have
shape ``(nx, ny, nz)``, physical vector fields ``(3, nx, ny, nz)``, and the
corresponding real-to-complex coefficient arrays replace the last axis by
``nz//2 + 1``.  The forward transform is unnormalized and the inverse carries
the ``1/(nx*ny*nz)`` factor, so coefficient files are reproducible
bit-exactly.

:class:`SpectralOps` bundles every Fourier-multiplier operator used by the
solver and the diagnostics: derivatives, Laplacian, Leray projection, the
vertical-mean projection Q, curl / inverse curl, the 2/3-rule dealiasing and
the helical-defect functional.  All methods are pure functions of their
inputs; the class only caches wavenumber arrays.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .grid import GridSpec

__all__ = ["PhysicalField", "SpectralField", "SpectralOps"]

logger = logging.getLogger(__name__)


@dataclass
class PhysicalField:
    """Sampled field on the grid: ``data`` has shape (nx,ny,nz) or (3,nx,ny,nz)."""

    grid: GridSpec
    data: np.ndarray

    def __post_init__(self) -> None:
        if self.data.shape[-3:] != self.grid.shape:
            raise ValueError(
                f"sample shape {self.data.shape} does not match grid {self.grid.shape}"
            )
        if not np.all(np.isfinite(self.data)):
            raise ValueError("physical field contains non-finite samples")


@dataclass
class SpectralField:
    """Complex rfft coefficients: shape (nx,ny,nz//2+1) or (3,nx,ny,nz//2+1)."""

    grid: GridSpec
    data: np.ndarray

    def __post_init__(self) -> None:
        if self.data.shape[-3:] != self.grid.spectral_shape:
            raise ValueError(
                f"coefficient shape {self.data.shape} does not match grid "
                f"{self.grid.spectral_shape}"
            )


class SpectralOps:
    """Fourier-space operators for a fixed :class:`GridSpec`."""

    def __init__(self, grid: GridSpec):
        self.grid = grid
        self.kx, self.ky, self.kz = grid.kvec
        self.k2 = grid.k_squared
        # 1/|k|^2 with the k = 0 entry zeroed (used by Leray and inverse curl)
        k2_safe = self.k2.copy()
        k2_safe[0, 0, 0] = 1.0
        self.inv_k2 = 1.0 / k2_safe
        self.inv_k2[0, 0, 0] = 0.0
        self.mask = grid.dealias_mask
        self._parseval = grid.volume * grid.mode_weight / grid.npoints**2
        # Worker threads for the FFT backend.  Each 1D transform is computed
        # identically regardless of the worker count, so results are
        # bit-for-bit independent of this setting.
        try:
            self._workers = max(1, int(os.environ.get("HELNS_THREADS", "1")))
        except ValueError:
            self._workers = 1

    # --- transforms -----------------------------------------------------

    def fwd(self, f: np.ndarray) -> np.ndarray:
        """Forward rfft over the last three axes (unnormalized)."""
        return sfft.rfftn(f, axes=(-3, -2, -1), workers=self._workers)

    def inv(self, F: np.ndarray) -> np.ndarray:
        """Inverse rfft over the last three axes (carries 1/N)."""
        return sfft.irfftn(F, s=self.grid.shape, axes=(-3, -2, -1), workers=self._workers)

    # --- multipliers -----------------------------------------------------

    def deriv(self, F: np.ndarray, axis: int) -> np.ndarray:
        """Spectral partial derivative along axis 0 (x), 1 (y) or 2 (z)."""
        k = (self.kx, self.ky, self.kz)[axis]
        return 1j * k * F

    def gradient(self, F: np.ndarray) -> np.ndarray:
        """Stack (d/dx F, d/dy F, d/dz F) along a new leading axis."""
        return np.stack([self.deriv(F, ax) for ax in range(3)])

    def laplacian(self, F: np.ndarray) -> np.ndarray:
        return -self.k2 * F

    def divergence(self, U: np.ndarray) -> np.ndarray:
        """Spectral divergence of a vector coefficient array (3, ...)."""
        return (
            1j * self.kx * U[0] + 1j * self.ky * U[1] + 1j * self.kz * U[2]
        )

    def leray(self, U: np.ndarray) -> np.ndarray:
        """Leray projection: remove the gradient part of each k != 0 mode.

        The k = 0 mode (box mean) is left unchanged.
        """
        kdotu = self.kx * U[0] + self.ky * U[1] + self.kz * U[2]
        corr = kdotu * self.inv_k2
        return np.stack(
            [U[0] - self.kx * corr, U[1] - self.ky * corr, U[2] - self.kz * corr]
        )

    def project_Q(self, F: np.ndarray) -> np.ndarray:
        """Vertical-mean projection: keep exactly the kz = 0 modes."""
        out = np.zeros_like(F)
        out[..., 0] = F[..., 0]
        return out

    def perp(self, F: np.ndarray) -> np.ndarray:
        """Zero-vertical-mean part: keep the kz != 0 modes."""
        out = F.copy()
        out[..., 0] = 0.0
        return out

    def dealias(self, F: np.ndarray) -> np.ndarray:
        """2/3-rule truncation: zero all modes with any |k_i| > n_i//3."""
        return F * self.mask

    def curl(self, U: np.ndarray) -> np.ndarray:
        kx, ky, kz = self.kx, self.ky, self.kz
        return np.stack(
            [
                1j * (ky * U[2] - kz * U[1]),
                1j * (kz * U[0] - kx * U[2]),
                1j * (kx * U[1] - ky * U[0]),
            ]
        )

    def inverse_curl(self, W: np.ndarray, return_correction: bool = False):
        """Unique zero-mean divergence-free U with curl(U) = W.

        The k = 0 mode of W is always dropped (a net-circulation vorticity has
        no periodic velocity potential; that part of the field is carried
        analytically by the decomposition layer).  If W is not
        divergence-free it is projected first and the relative magnitude of
        the correction is reported.
        """
        Wsol = self.leray(W)
        rel = 0.0
        norm_w = self.l2_norm(W)
        if norm_w > 0:
            rel = self.l2_norm(W - Wsol) / norm_w
            if rel > 1e-12:
                logger.debug("inverse_curl: projected non-solenoidal input, relative correction %.3e", rel)
        U = np.stack(
            [
                1j * (self.ky * Wsol[2] - self.kz * Wsol[1]),
                1j * (self.kz * Wsol[0] - self.kx * Wsol[2]),
                1j * (self.kx * Wsol[1] - self.ky * Wsol[0]),
            ]
        ) * self.inv_k2
        if return_correction:
            return U, rel
        return U

    # --- norms (spectral-exact via Parseval) ------------------------------

    def l2_norm_sq(self, F: np.ndarray) -> float:
        """Squared L2(box) norm of a coefficient array (any component stack)."""
        return float(np.sum(np.abs(F) ** 2 * self._parseval))

    def l2_norm(self, F: np.ndarray) -> float:
        return float(np.sqrt(self.l2_norm_sq(F)))

    def inner(self, F: np.ndarray, G: np.ndarray) -> float:
        """L2(box) inner product of two coefficient arrays."""
        return float(np.sum((F * np.conj(G)).real * self._parseval))

    def grad_norm_sq(self, F: np.ndarray) -> float:
        return float(np.sum(self.k2 * np.abs(F) ** 2 * self._parseval))

    def lap_norm_sq(self, F: np.ndarray) -> float:
        return float(np.sum(self.k2**2 * np.abs(F) ** 2 * self._parseval))

    def physical_l2_norm(self, f: np.ndarray) -> float:
        """Grid-sum L2 norm of physical samples (matches Parseval)."""
        return float(np.sqrt(np.sum(f**2) * self.grid.cell_volume))

    def max_divergence(self, U: np.ndarray) -> float:
        """max |div u| evaluated on the physical grid."""
        return float(np.max(np.abs(self.inv(self.divergence(U)))))

    # --- helical defect -----------------------------------------------------

    def helical_defect(self, u: np.ndarray, mask_radius: float | None = None) -> float:
        """Masked, H1-normalized helical-symmetry defect of a velocity field.

        Helical symmetry means the three cylindrical components about the
        grid center are annihilated by D = d/dtheta + L d/dz.  Written in
        Cartesian components this is equivalent, pointwise, to the vanishing
        of (D u_x + u_y, D u_y - u_x, D u_z), which avoids forming the
        axis-singular cylindrical components.  The root-sum-square of the
        three masked L2 norms is returned, normalized by the H1 norm of u.
        The default mask keeps r <= Lx/4 to exclude wrap-around artifacts of
        the physical-space angular derivative.

        Accepts physical samples (3, nx, ny, nz); returns 0 for a zero field.
        """
        if mask_radius is None:
            mask_radius = self.grid.Lx / 4.0
        U = self.fwd(u)
        h1_sq = self.l2_norm_sq(U) + self.grad_norm_sq(U)
        if h1_sq == 0.0:
            return 0.0
        xc = self.grid.xc[..., None]
        yc = self.grid.yc[..., None]
        L = self.grid.pitch
        mask = (self.grid.r2d <= mask_radius)[..., None]
        dV = self.grid.cell_volume
        total = 0.0
        shift = (u[1], -u[0], np.zeros_like(u[2]))
        for comp in range(3):
            dx_c = self.inv(self.deriv(U[comp], 0))
            dy_c = self.inv(self.deriv(U[comp], 1))
            dz_c = self.inv(self.deriv(U[comp], 2))
            defect = xc * dy_c - yc * dx_c + L * dz_c + shift[comp]
            total += float(np.sum((defect * mask) ** 2) * dV)
        return float(np.sqrt(total / h1_sq))
