"""Ring averaging, weighted norms and the circulation decomposition."""

import numpy as np
import pytest

from helns.decomposition import (
    circulation_a,
    decompose,
    export_profile_csv,
    ring_average,
    ring_average_cylindrical,
    weighted_l2m_norm,
)
from helns.fields import (
    PerturbationSpec,
    oseen_vorticity,
    random_helical_perturbation,
    shear_flow,
)
from helns.grid import GridSpec
from helns.radial import RadialProfile, uniform_radii
from helns.spectral import SpectralOps


@pytest.fixture(scope="module")
def grid():
    return GridSpec.cube(32, 20.0, 1.0)


@pytest.fixture(scope="module")
def ops(grid):
    return SpectralOps(grid)


@pytest.fixture(scope="module")
def perturbation(grid, ops):
    spec = PerturbationSpec(seed=2, amplitude=0.1, modes=(0, 1, 2), sigma=1.2)
    return random_helical_perturbation(spec, grid, ops)


class TestRingAverage:
    def test_spectral_sampling_is_exact_for_trig_field(self, grid):
        kx, ky = 2 * np.pi / grid.Lx, 2 * np.pi * 2 / grid.Ly
        x = grid.x[:, None]
        y = grid.y[None, :]
        f = 0.3 + np.cos(kx * x) * np.sin(ky * y)
        radii = np.array([0.0, 1.0, 2.5, 4.0])
        prof = ring_average(f, grid, radii=radii, n_theta=128, method="spectral")
        cx, cy = grid.center
        for i, r in enumerate(radii):
            theta = 2 * np.pi * np.arange(128) / 128
            fx = 0.3 + np.cos(kx * (cx + r * np.cos(theta))) * np.sin(
                ky * (cy + r * np.sin(theta))
            )
            assert prof.values[i] == pytest.approx(float(fx.mean()), abs=1e-12)

    def test_bilinear_close_to_spectral_on_smooth_field(self, grid):
        f = np.exp(-grid.r2d**2 / 6.0)
        ps = ring_average(f, grid, method="spectral")
        pb = ring_average(f, grid, method="bilinear")
        assert np.max(np.abs(ps.values - pb.values)) < 5e-2

    def test_axisymmetric_field_recovers_profile(self, grid):
        f = np.exp(-grid.r2d**2 / 6.0)
        prof = ring_average(f, grid, method="spectral")
        assert np.max(np.abs(prof.values - np.exp(-prof.r**2 / 6.0))) < 1e-6

    def test_cylindrical_components(self, grid):
        # a pure rotation field has u_r = 0 and u_theta = r
        u = np.zeros((3, grid.nx, grid.ny))
        u[0] = -grid.yc * np.exp(-grid.r2d**2 / 8.0)
        u[1] = grid.xc * np.exp(-grid.r2d**2 / 8.0)
        u_r, u_theta, u_z = ring_average_cylindrical(u, grid)
        keep = u_theta.r < 4.0
        assert np.max(np.abs(u_r.values)) < 1e-7
        expected = u_theta.r * np.exp(-u_theta.r**2 / 8.0)
        assert np.max(np.abs(u_theta.values - expected)[keep]) < 1e-6
        assert np.max(np.abs(u_z.values)) == 0.0


class TestWeightedNorm:
    def test_grid_and_profile_quadratures_agree(self, grid):
        w2d = np.exp(-grid.r2d**2 / 4.0)
        w = np.broadcast_to(w2d[..., None], grid.shape).copy()
        grid_norm = weighted_l2m_norm(w, 1.5, grid=grid)
        r = uniform_radii(grid.Lx / 2, 4096)
        prof = RadialProfile(r, np.exp(-(r**2) / 4.0))
        prof_norm_sq = 0.0
        from helns.radial import weighted_l2m_norm_profile

        prof_norm = weighted_l2m_norm_profile(prof, 1.5, grid.pitch)
        # the box corners carry the Gaussian tail: small relative difference
        assert grid_norm == pytest.approx(prof_norm, rel=1e-3)

    def test_vector_field_accepted(self, grid):
        w = np.zeros((3,) + grid.shape)
        w[2] = np.exp(-grid.r2d[..., None] ** 2)
        assert weighted_l2m_norm(w, 1.2, grid=grid) > 0

    def test_requires_location_information(self, grid):
        with pytest.raises(ValueError):
            weighted_l2m_norm(np.zeros(grid.shape), 1.2)


class TestCirculation:
    def test_oseen_vorticity_has_unit_circulation(self, grid):
        w = oseen_vorticity(grid, 0.0)
        assert circulation_a(w, grid) == pytest.approx(1.0, abs=1e-10)

    def test_shear_flow_has_zero_circulation(self, grid):
        _, w = shear_flow(grid, 0.0)
        assert circulation_a(w, grid) == 0.0

    def test_scales_linearly(self, grid):
        w = oseen_vorticity(grid, 0.0)
        assert circulation_a(-2.5 * w, grid) == pytest.approx(-2.5, abs=1e-10)


class TestDecompose:
    def test_round_trip(self, grid, ops, perturbation):
        w = 0.5 * oseen_vorticity(grid, 0.0) + ops.inv(ops.curl(perturbation))
        result = decompose(w, grid, 1.5, ops=ops)
        assert abs(result.a - 0.5) < 1e-10
        diff = result.v_hat - perturbation
        h1_err = np.sqrt(ops.l2_norm_sq(diff) + ops.grad_norm_sq(diff))
        assert h1_err / result.h1_v < 1e-7
        assert result.mean_radial_max < 1e-10
        # h1 consistency of the reported norms
        assert result.h1_v == pytest.approx(
            np.hypot(result.l2_v, result.grad_l2_v), rel=1e-12
        )

    def test_linearity_in_the_perturbation(self, grid, ops, perturbation):
        w_lo = oseen_vorticity(grid, 0.0)
        w_pert = ops.inv(ops.curl(perturbation))
        r1 = decompose(w_lo + w_pert, grid, 1.5, ops=ops)
        r2 = decompose(w_lo + 2.0 * w_pert, grid, 1.5, ops=ops)
        assert np.allclose(r2.v_hat, 2.0 * r1.v_hat, atol=1e-12)

    def test_reconstruction_inverts_decomposition(self, grid, ops, perturbation):
        w = 1.0 * oseen_vorticity(grid, 0.0) + ops.inv(ops.curl(perturbation))
        result = decompose(w, grid, 1.5, ops=ops)
        w_rec = result.reconstruct_vorticity(ops)
        mask = grid.r2d <= grid.Lx / 4
        err = np.max(np.abs((w_rec - w)[:, mask, :]))
        assert err < 1e-8 * max(1.0, np.max(np.abs(w)))

    def test_rejects_small_m(self, grid, ops, perturbation):
        w = ops.inv(ops.curl(perturbation))
        with pytest.raises(ValueError, match="must exceed 1"):
            decompose(w, grid, 0.9, ops=ops)

    def test_rejects_nonsolenoidal_vorticity(self, grid, ops):
        w = np.zeros((3,) + grid.shape)
        w[0] = np.exp(-grid.r2d[..., None] ** 2 / 4.0)  # div w != 0
        with pytest.raises(ValueError, match="diverg"):
            decompose(w, grid, 1.5, ops=ops)

    def test_rejects_non_helical_vorticity(self, grid, ops):
        # a z-dependent non-helical swirl: solenoidal but breaks the symmetry
        z = grid.z[None, None, :]
        envelope = np.exp(-grid.r2d[..., None] ** 2 / 6.0)
        u = np.zeros((3,) + grid.shape)
        u[0] = -grid.yc[..., None] * envelope * np.cos(2 * np.pi * z / grid.Lz)
        u[1] = grid.xc[..., None] * envelope * np.cos(2 * np.pi * z / grid.Lz)
        w = ops.inv(ops.curl(ops.leray(ops.fwd(u))))
        with pytest.raises(ValueError, match="helical"):
            decompose(w, grid, 1.5, ops=ops)

    def test_radial_mean_route_reported(self, grid, ops, perturbation):
        w = oseen_vorticity(grid, 0.0) + ops.inv(ops.curl(perturbation))
        result = decompose(w, grid, 1.5, ops=ops, mean_route="radial")
        assert result.mean_route == "radial"
        assert np.isfinite(result.zero_mass_gap)
        assert set(result.profiles) >= {"u_theta_bar", "v_theta_bar", "w_z_bar"}

    def test_report_and_profile_export(self, grid, ops, perturbation, tmp_path):
        w = oseen_vorticity(grid, 0.0) + ops.inv(ops.curl(perturbation))
        result = decompose(w, grid, 1.5, ops=ops)
        text = result.report_text()
        assert "a = " in text and "helical_defect" in text
        path = tmp_path / "profile.csv"
        export_profile_csv(result.profiles["v_theta_bar"], path)
        lines = path.read_text().strip().split("\n")
        assert lines[0] == "r,value"
        assert len(lines) == result.profiles["v_theta_bar"].r.size + 1
