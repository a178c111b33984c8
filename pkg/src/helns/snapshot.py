"""HLXF binary snapshots.

Layout (all little-endian):

* magic bytes ``HLXF``
* version: u32
* nx, ny, nz: u32 each
* Lx, Ly, L (pitch), time: f64 each
* component count: u8
* body: for each component, nx*ny*nz f64 samples in row-major order with x
  varying fastest (z slowest).

Snapshots written by the simulator hold the three components of the total
vorticity (background plus perturbation), which is localized in the
cross-section and therefore spectrally clean to reload — unlike the total
velocity, whose circulation tail wraps around the periodic box.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import GridSpec

MAGIC = b"HLXF"
VERSION = 1

__all__ = ["MAGIC", "VERSION", "SnapshotData", "read_snapshot", "write_snapshot"]


@dataclass
class SnapshotData:
    """Decoded snapshot: geometry, sample time and field components."""

    grid: GridSpec
    time: float
    fields: np.ndarray  # (ncomp, nx, ny, nz)
    version: int = VERSION


def write_snapshot(path, grid: GridSpec, time: float, fields: np.ndarray) -> None:
    """Write field components to an HLXF file."""
    fields = np.asarray(fields, dtype=float)
    if fields.ndim != 4 or fields.shape[1:] != grid.shape:
        raise ValueError(
            f"expected fields of shape (ncomp,) + {grid.shape}, got {fields.shape}"
        )
    ncomp = fields.shape[0]
    if not 1 <= ncomp <= 255:
        raise ValueError("component count must be in [1, 255]")
    if not np.all(np.isfinite(fields)):
        raise ValueError("snapshot fields must be finite")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(np.array([VERSION, grid.nx, grid.ny, grid.nz], dtype="<u4").tobytes())
        fh.write(
            np.array([grid.Lx, grid.Ly, grid.pitch, time], dtype="<f8").tobytes()
        )
        fh.write(np.array([ncomp], dtype="<u1").tobytes())
        for c in range(ncomp):
            # x-fastest row-major body: transpose to (z, y, x) before flattening.
            fh.write(
                np.ascontiguousarray(fields[c].transpose(2, 1, 0))
                .astype("<f8")
                .tobytes()
            )


def read_snapshot(path) -> SnapshotData:
    """Read an HLXF file back into grid metadata and field samples."""
    with open(path, "rb") as fh:
        raw = fh.read()
    header = 4 + 4 * 4 + 4 * 8 + 1
    if len(raw) < header:
        raise ValueError("truncated HLXF header")
    if raw[:4] != MAGIC:
        raise ValueError(f"bad magic {raw[:4]!r}; expected {MAGIC!r}")
    version, nx, ny, nz = np.frombuffer(raw, dtype="<u4", count=4, offset=4)
    if version != VERSION:
        raise ValueError(f"unsupported HLXF version {int(version)}")
    Lx, Ly, pitch, time = np.frombuffer(raw, dtype="<f8", count=4, offset=20)
    ncomp = int(np.frombuffer(raw, dtype="<u1", count=1, offset=52)[0])
    grid = GridSpec(nx=int(nx), ny=int(ny), nz=int(nz), Lx=float(Lx), Ly=float(Ly), pitch=float(pitch))
    expected = ncomp * grid.npoints
    body = np.frombuffer(raw, dtype="<f8", offset=header)
    if body.size != expected:
        raise ValueError(
            f"HLXF body holds {body.size} samples; header promises {expected}"
        )
    fields = np.empty((ncomp, grid.nx, grid.ny, grid.nz))
    per = grid.npoints
    for c in range(ncomp):
        fields[c] = (
            body[c * per : (c + 1) * per]
            .reshape(grid.nz, grid.ny, grid.nx)
            .transpose(2, 1, 0)
        )
    return SnapshotData(grid=grid, time=float(time), fields=fields, version=int(version))
