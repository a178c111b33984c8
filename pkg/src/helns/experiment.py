"""Turn a validated configuration into a simulation run with outputs.

:func:`run_experiment` builds the grid and initial data, advances the 3D
engine while streaming :class:`~helns.diagnostics.DiagnosticsRecord` rows,
writes the diagnostics CSV (and optional HLXF vorticity snapshots) and
returns the collected artifacts together with an invariant report:

* max |div v| over all output times,
* worst relative defect of the orthogonal energy split,
* helical-defect growth rate per unit time,
* (for circulation-free runs) the worst energy-identity residual.

Runs whose perturbation energy grows past a fixed factor of its initial
value abort with :class:`InstabilityError` after flushing the partial CSV.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import ExperimentConfig
from .diagnostics import DiagnosticsRecord, RecordBuilder, write_records_csv
from .diagnostics import energy_identity_residual, orthogonal_split_residual
from .fields import (
    OseenParams,
    PerturbationSpec,
    heat_kernel_2d,
    oseen_vorticity,
    random_helical_perturbation,
    shear_flow,
)
from .grid import GridSpec
from .snapshot import write_snapshot
from .solver import SimulationState, SolverConfig, rhs_perturbation, run_spectral3d
from .spectral import SpectralOps

__all__ = [
    "InstabilityError",
    "InvariantReport",
    "RunResult",
    "build_grid",
    "build_initial",
    "run_experiment",
    "total_vorticity",
]

logger = logging.getLogger(__name__)

# Perturbation-energy growth beyond this factor of the initial energy is
# treated as numerical instability (stable runs are strictly dissipative
# up to the bounded background coupling; see InstabilityError).
GUARD_FACTOR = 10.0


class InstabilityError(RuntimeError):
    """Raised when the perturbation energy grows past the stability guard.

    The partial diagnostics CSV written before the abort is available as
    ``csv_path``.
    """

    def __init__(self, message: str, csv_path=None):
        super().__init__(message)
        self.csv_path = csv_path


@dataclass
class InvariantReport:
    """Worst-case invariant defects observed over a run."""

    max_div: float
    pythagoras: float
    defect_initial: float
    defect_final: float
    defect_growth_rate: float
    energy_residual_max: float | None

    def summary(self) -> str:
        parts = [
            f"max |div v| = {self.max_div:.3e}",
            f"orthogonal-split defect = {self.pythagoras:.3e}",
            f"helical defect growth = {self.defect_growth_rate:.3e} per unit time",
        ]
        if self.energy_residual_max is not None:
            parts.append(f"energy-identity residual = {self.energy_residual_max:.3e}")
        return "; ".join(parts)


@dataclass
class RunResult:
    """Artifacts of one experiment run."""

    config: ExperimentConfig
    grid: GridSpec
    records: list
    final_state: SimulationState
    csv_path: Path | None
    snapshot_paths: list
    invariants: InvariantReport


def build_grid(cfg: ExperimentConfig) -> GridSpec:
    return GridSpec(nx=cfg.nx, ny=cfg.ny, nz=cfg.nz, Lx=cfg.Lx, Ly=cfg.Lx, pitch=cfg.pitch)


def _lamb2d_initial(cfg: ExperimentConfig, grid: GridSpec, ops: SpectralOps) -> np.ndarray:
    """Columnar zero-circulation dipole-in-spread vortex.

    The vertical vorticity is amplitude * (G(s0) - G(1)) with unit-mass
    Gaussians G(s) = exp(-r^2/(4s)) / (4 pi s): the two masses cancel, so the
    induced velocity is localized and the circulation is exactly zero.
    """
    w_z = cfg.amplitude * (
        heat_kernel_2d(cfg.s0, grid.xc, grid.yc)
        - heat_kernel_2d(1.0, grid.xc, grid.yc)
    )
    w = np.zeros((3,) + grid.shape)
    w[2] = w_z[..., None]
    return ops.inverse_curl(ops.fwd(w))


def build_initial(cfg: ExperimentConfig, grid: GridSpec, ops: SpectralOps) -> np.ndarray:
    """Spectral perturbation coefficients v0_hat for the configured kind."""
    if cfg.kind == "oseen-only":
        return np.zeros((3,) + grid.spectral_shape, dtype=complex)
    if cfg.kind == "shear":
        u0, _ = shear_flow(grid, 0.0)
        return ops.fwd(u0)
    if cfg.kind == "lamb2d":
        return _lamb2d_initial(cfg, grid, ops)
    if cfg.kind == "perturbed-oseen":
        spec = PerturbationSpec(
            seed=cfg.seed, amplitude=cfg.amplitude, modes=cfg.modes, sigma=cfg.sigma
        )
        return random_helical_perturbation(spec, grid, ops)
    raise ValueError(f"unknown initial kind {cfg.kind!r}")


def total_vorticity(state: SimulationState, a: float, ops: SpectralOps) -> np.ndarray:
    """Physical total vorticity a w_LO(t) + curl v on the grid.

    The background curl is analytic (no discretized seam at the periodic
    wrap); only the localized perturbation goes through the spectral curl.
    """
    w = ops.inv(ops.curl(state.v_hat))
    if a != 0.0:
        w += a * oseen_vorticity(state.grid, state.t)
    return w


def run_experiment(
    cfg: ExperimentConfig,
    out_dir=".",
    *,
    ops: SpectralOps | None = None,
    quiet: bool = False,
    guard_factor: float = GUARD_FACTOR,
    check_energy: bool | None = None,
) -> RunResult:
    """Run the configured experiment, writing CSV and snapshot artifacts.

    ``check_energy`` controls the per-record energy-identity evaluation; by
    default it is on exactly for circulation-free (a = 0) runs, where the
    instantaneous identity holds without background exchange terms.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    grid = build_grid(cfg)
    if ops is None:
        ops = SpectralOps(grid)
    if check_energy is None:
        check_energy = cfg.a == 0.0

    v0_hat = build_initial(cfg, grid, ops)
    builder = RecordBuilder(grid, ops, cfg.a)
    params = OseenParams(a=cfg.a)

    csv_path = out_dir / cfg.csv
    snap_dir = out_dir / cfg.snapshot_dir
    snapshot_paths: list[Path] = []
    records: list[DiagnosticsRecord] = []
    pythagoras_max = 0.0
    energy_max = 0.0 if check_energy else None
    guard_sq = None
    next_snap = 0.0 if cfg.snapshot_dt > 0 else None
    snap_index = 0

    def observer(state: SimulationState) -> None:
        nonlocal pythagoras_max, energy_max, guard_sq, next_snap, snap_index
        rec = builder(state)
        records.append(rec)
        pythagoras_max = max(pythagoras_max, orthogonal_split_residual(state.v_hat, ops))
        if check_energy and rec.l2_grad_v > 0.0:
            rhs_nl = rhs_perturbation(state.v_hat, state.t, grid, params, ops)
            energy_max = max(
                energy_max, energy_identity_residual(state.v_hat, rhs_nl, ops)
            )
        if guard_sq is None:
            guard_sq = guard_factor * max(rec.l2_v**2, np.finfo(float).tiny)
        elif rec.l2_v**2 > guard_sq:
            csv_path.parent.mkdir(parents=True, exist_ok=True)
            write_records_csv(records, csv_path)
            raise InstabilityError(
                f"perturbation energy {rec.l2_v**2:.6g} at t={rec.t:.6g} exceeds "
                f"{guard_factor:g} x initial energy; partial diagnostics flushed to "
                f"{csv_path}",
                csv_path=csv_path,
            )
        if next_snap is not None and state.t >= next_snap - 1e-9:
            snap_dir.mkdir(parents=True, exist_ok=True)
            path = snap_dir / f"snapshot_{snap_index:04d}.hlxf"
            write_snapshot(path, grid, state.t, total_vorticity(state, cfg.a, ops))
            snapshot_paths.append(path)
            snap_index += 1
            while next_snap <= state.t + 1e-9:
                next_snap += cfg.snapshot_dt

    solver_cfg = SolverConfig(
        engine="spectral3d",
        t_end=cfg.t_end,
        dt=cfg.dt,
        cfl=cfg.cfl,
        output_dt=cfg.output_dt,
        background=params,
        snapshots=cfg.snapshot_dt > 0,
        snapshot_dt=cfg.snapshot_dt if cfg.snapshot_dt > 0 else None,
    )
    final_state = run_spectral3d(v0_hat, grid, solver_cfg, observer=observer, ops=ops)

    csv_path.parent.mkdir(parents=True, exist_ok=True)
    write_records_csv(records, csv_path)

    d0, d1 = records[0].helical_defect, records[-1].helical_defect
    span = records[-1].t - records[0].t
    invariants = InvariantReport(
        max_div=max(r.max_div for r in records),
        pythagoras=pythagoras_max,
        defect_initial=d0,
        defect_final=d1,
        defect_growth_rate=(d1 - d0) / span if span > 0 else 0.0,
        energy_residual_max=energy_max,
    )
    if not quiet:
        logger.info(
            "run complete: %d records to %s; %s",
            len(records), csv_path, invariants.summary(),
        )
    return RunResult(
        config=cfg,
        grid=grid,
        records=records,
        final_state=final_state,
        csv_path=csv_path,
        snapshot_paths=snapshot_paths,
        invariants=invariants,
    )
