"""Periodic-box geometry: grid spacing, coordinates and wavenumbers.

The domain is a rectangular box, periodic in all three directions.  The
horizontal cross-section is square (``Lx == Ly``) and the vertical extent is
tied to the helical pitch parameter ``L``: the box height is exactly
``2*pi*L``.  All spectral machinery (module :mod:`helns.spectral`) derives its
wavenumbers and quadrature weights from a :class:`GridSpec`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

__all__ = ["GridSpec"]


def _validate_samples(name: str, n: int) -> None:
    if n < 8 or n % 2 != 0:
        raise ValueError(f"{name} must be an even integer >= 8, got {n}")


@dataclass(frozen=True)
class GridSpec:
    """Geometry and resolution of the periodic simulation box.

    Parameters
    ----------
    nx, ny, nz : int
        Sample counts along x, y, z.  Even and at least 8.
    Lx, Ly : float
        Horizontal box side lengths; must be equal.
    pitch : float
        Helical pitch parameter L.  The vertical box length is ``2*pi*pitch``
        exactly.
    center : tuple of float, optional
        Horizontal coordinates of the vortex axis.  Defaults to the box
        center ``(Lx/2, Ly/2)``.
    """

    nx: int
    ny: int
    nz: int
    Lx: float
    Ly: float
    pitch: float
    center: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        _validate_samples("nx", self.nx)
        _validate_samples("ny", self.ny)
        _validate_samples("nz", self.nz)
        if not (self.Lx > 0 and self.Ly > 0):
            raise ValueError("box side lengths must be positive")
        if self.Lx != self.Ly:
            raise ValueError(
                f"square cross-section required (Lx = Ly), got Lx={self.Lx}, Ly={self.Ly}"
            )
        if not self.pitch > 0:
            raise ValueError(f"pitch must be positive, got {self.pitch}")
        if self.center is None:
            object.__setattr__(self, "center", (self.Lx / 2.0, self.Ly / 2.0))

    @classmethod
    def cube(cls, n: int, Lx: float, pitch: float) -> "GridSpec":
        """Convenience constructor for an n^3 grid with square cross-section."""
        return cls(nx=n, ny=n, nz=n, Lx=Lx, Ly=Lx, pitch=pitch)

    # --- derived geometry -------------------------------------------------

    @property
    def Lz(self) -> float:
        """Vertical box length, exactly ``2*pi*pitch``."""
        return 2.0 * np.pi * self.pitch

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.nx, self.ny, self.nz)

    @property
    def spectral_shape(self) -> tuple[int, int, int]:
        """Shape of real-to-complex coefficient arrays (z-axis halved)."""
        return (self.nx, self.ny, self.nz // 2 + 1)

    @property
    def dx(self) -> float:
        return self.Lx / self.nx

    @property
    def dy(self) -> float:
        return self.Ly / self.ny

    @property
    def dz(self) -> float:
        return self.Lz / self.nz

    @property
    def cell_volume(self) -> float:
        return self.dx * self.dy * self.dz

    @property
    def volume(self) -> float:
        return self.Lx * self.Ly * self.Lz

    @property
    def npoints(self) -> int:
        return self.nx * self.ny * self.nz

    # --- coordinates -------------------------------------------------------

    @cached_property
    def x(self) -> np.ndarray:
        return np.arange(self.nx) * self.dx

    @cached_property
    def y(self) -> np.ndarray:
        return np.arange(self.ny) * self.dy

    @cached_property
    def z(self) -> np.ndarray:
        return np.arange(self.nz) * self.dz

    @cached_property
    def xc(self) -> np.ndarray:
        """x - center_x, wrapped to [-Lx/2, Lx/2), shape (nx, 1)."""
        cx = self.center[0]
        return (((self.x - cx + self.Lx / 2) % self.Lx) - self.Lx / 2).reshape(-1, 1)

    @cached_property
    def yc(self) -> np.ndarray:
        """y - center_y, wrapped to [-Ly/2, Ly/2), shape (1, ny)."""
        cy = self.center[1]
        return (((self.y - cy + self.Ly / 2) % self.Ly) - self.Ly / 2).reshape(1, -1)

    @cached_property
    def r2d(self) -> np.ndarray:
        """Horizontal radius about the center, shape (nx, ny)."""
        return np.hypot(self.xc, self.yc)

    # --- wavenumbers ---------------------------------------------------------

    @cached_property
    def kx(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.nx, d=self.dx)

    @cached_property
    def ky(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.ny, d=self.dy)

    @cached_property
    def kz(self) -> np.ndarray:
        """Non-negative vertical wavenumbers of the real transform."""
        return 2.0 * np.pi * np.fft.rfftfreq(self.nz, d=self.dz)

    @cached_property
    def kvec(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Broadcastable (kx, ky, kz) triple on the spectral shape."""
        return (
            self.kx.reshape(-1, 1, 1),
            self.ky.reshape(1, -1, 1),
            self.kz.reshape(1, 1, -1),
        )

    @cached_property
    def k_squared(self) -> np.ndarray:
        kx, ky, kz = self.kvec
        return kx**2 + ky**2 + kz**2

    @cached_property
    def mode_weight(self) -> np.ndarray:
        """Multiplicity of each rfft coefficient in Parseval sums.

        Interior kz planes represent a conjugate pair of modes and count
        twice; the kz = 0 and Nyquist planes count once.
        """
        w = np.full(self.nz // 2 + 1, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        return w.reshape(1, 1, -1)

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """Boolean 2/3-rule mask: True where coefficients are kept."""
        ix = np.abs(np.fft.fftfreq(self.nx) * self.nx) <= self.nx // 3
        iy = np.abs(np.fft.fftfreq(self.ny) * self.ny) <= self.ny // 3
        iz = np.abs(np.fft.rfftfreq(self.nz) * self.nz) <= self.nz // 3
        return (
            ix.reshape(-1, 1, 1) & iy.reshape(1, -1, 1) & iz.reshape(1, 1, -1)
        )
