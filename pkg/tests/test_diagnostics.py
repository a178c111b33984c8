"""Diagnostics stream: records, CSV contract, fits and inequality checks."""

import dataclasses

import numpy as np
import pytest

from helns.diagnostics import (
    CSV_COLUMNS,
    DEFAULT_C0,
    DiagnosticsRecord,
    RecordBuilder,
    energy_identity_residual,
    fit_exponential,
    fit_power,
    fitted_c0,
    format_float,
    ladyzhenskaya_ratio,
    load_records_csv,
    log_energy_check,
    moving_median3,
    orthogonal_split_residual,
    poincare_ratio,
    source_norm,
    transient_time,
    write_records_csv,
)
from helns.fields import OseenParams, PerturbationSpec, random_helical_perturbation
from helns.grid import GridSpec
from helns.solver import SimulationState, rhs_perturbation
from helns.spectral import SpectralOps


@pytest.fixture(scope="module")
def grid():
    return GridSpec.cube(16, 20.0, 1.0)


@pytest.fixture(scope="module")
def ops(grid):
    return SpectralOps(grid)


@pytest.fixture(scope="module")
def pert(grid, ops):
    spec = PerturbationSpec(seed=3, amplitude=0.1, sigma=1.2)
    return random_helical_perturbation(spec, grid, ops)


def _mk_record(**overrides):
    values = {name: 0.0 for name in CSV_COLUMNS}
    values.update(overrides)
    if "sqrt_t_l2_grad_v" not in overrides:
        values["sqrt_t_l2_grad_v"] = np.sqrt(values["t"]) * values["l2_grad_v"]
    return DiagnosticsRecord(**values)


class TestRecordValidation:
    def test_consistent_record_passes(self):
        _mk_record(t=2.0, l2_v=0.5, l2_grad_v=0.25).validate()

    def test_negative_norm_rejected(self):
        with pytest.raises(ValueError, match="nonnegative"):
            _mk_record(t=1.0, l2_v=-0.5).validate()

    def test_negative_circulation_allowed(self):
        _mk_record(t=1.0, circulation_a=-2.0).validate()

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError, match="finite"):
            _mk_record(t=1.0, l2_uperp=np.nan).validate()

    def test_inconsistent_sqrt_t_column_rejected(self):
        with pytest.raises(ValueError, match="sqrt_t"):
            _mk_record(t=4.0, l2_grad_v=1.0, sqrt_t_l2_grad_v=1.9).validate()


class TestCsvContract:
    def test_round_trip_is_exact(self, tmp_path):
        records = [
            _mk_record(t=0.0, l2_v=np.pi, l2_grad_v=1.0 / 3.0, circulation_a=-0.5),
            _mk_record(t=0.1, l2_v=1e-300, l2_grad_v=np.sqrt(2.0), k_perp=1e300),
            _mk_record(t=np.e, l2_v=0.1, cum_enstrophy=7.0 / 11.0),
        ]
        path = tmp_path / "records.csv"
        write_records_csv(records, path)
        loaded = load_records_csv(path)
        assert len(loaded) == len(records)
        for a, b in zip(records, loaded):
            for f in dataclasses.fields(DiagnosticsRecord):
                assert getattr(a, f.name) == getattr(b, f.name), f.name

    def test_header_is_schema_order(self, tmp_path):
        path = tmp_path / "records.csv"
        write_records_csv([_mk_record(t=1.0)], path)
        assert path.read_text().split("\n")[0] == ",".join(CSV_COLUMNS)

    def test_unexpected_header_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("t,bogus\n0.0,1.0\n")
        with pytest.raises(ValueError, match="header"):
            load_records_csv(path)

    def test_short_row_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(",".join(CSV_COLUMNS) + "\n0.0,1.0\n")
        with pytest.raises(ValueError, match="width|schema"):
            load_records_csv(path)

    @pytest.mark.parametrize("x", [np.pi, 1.0 / 3.0, 1e-300, 1e300, 0.1, 0.0])
    def test_format_float_round_trips(self, x):
        assert float(format_float(x)) == x


class TestFits:
    def test_exponential_fit_recovers_rate(self):
        t = np.linspace(0.0, 10.0, 101)
        fit = fit_exponential(t, 3.0 * np.exp(-0.7 * t))
        assert fit.model == "exponential"
        assert fit.exponent == pytest.approx(-0.7, rel=1e-9)
        assert fit.residual < 1e-10
        assert fit.window[0] >= 4.9  # trailing half of the series

    def test_power_fit_recovers_exponent(self):
        t = np.linspace(0.1, 20.0, 200)
        fit = fit_power(t, 5.0 * t**-1.25)
        assert fit.model == "power"
        assert fit.exponent == pytest.approx(-1.25, rel=1e-9)
        assert fit.window[0] >= 5.0  # default window starts at t_end / 4

    def test_power_fit_honors_explicit_window(self):
        t = np.linspace(0.1, 20.0, 200)
        y = 5.0 * t**-1.25
        y[t < 10.0] += 1.0  # corrupt the head; the window must avoid it
        fit = fit_power(t, y, window=(10.0, 20.0))
        assert fit.exponent == pytest.approx(-1.25, rel=1e-6)

    def test_too_few_samples_rejected(self):
        with pytest.raises(ValueError, match="at least 4"):
            fit_exponential([0.0, 1.0, 2.0], [1.0, 0.5, 0.25])

    def test_nonpositive_tail_rejected(self):
        t = np.linspace(0.0, 1.0, 10)
        with pytest.raises(ValueError, match="positive"):
            fit_exponential(t, np.zeros_like(t))


class TestTransientTime:
    def test_hump_returns_peak_time(self):
        t = np.linspace(0.0, 10.0, 101)
        y = (0.2 + t) * np.exp(-t)
        val = transient_time(t, y)
        assert val is not None and 0.5 <= val <= 1.1

    def test_monotone_decay_returns_start(self):
        t = np.linspace(0.0, 5.0, 51)
        assert transient_time(t, np.exp(-t)) == 0.0

    def test_growth_at_end_returns_none(self):
        t = np.linspace(0.0, 5.0, 51)
        assert transient_time(t, 1.0 + t) is None

    def test_noise_below_rtol_ignored(self):
        t = np.linspace(0.0, 5.0, 51)
        y = np.exp(-t) * (1.0 + 1e-12 * (-1.0) ** np.arange(t.size))
        assert transient_time(t, y) == 0.0

    def test_moving_median_removes_spikes(self):
        y = np.array([1.0, 1.0, 100.0, 1.0, 1.0])
        assert np.array_equal(moving_median3(y), np.ones(5))


class TestLogEnergyCheck:
    def _records(self, lhs_of_t):
        t = np.linspace(0.0, 8.0, 81)
        out = []
        for ti, lhs in zip(t, lhs_of_t(t)):
            out.append(_mk_record(t=ti, l2_v=np.sqrt(0.5 * lhs),
                                  cum_enstrophy=0.25 * lhs))
        return out

    def test_bounded_ratio_passes(self):
        # lhs proportional to 1 + ln(1+t) with a slight downward drift
        recs = self._records(
            lambda t: (1.0 + np.log1p(t)) * (1.0 - 1e-3 * t / t[-1])
        )
        report = log_energy_check(recs)
        assert report.passed
        assert report.ratio_max <= 1.0 + 1e-12

    def test_growing_ratio_fails(self):
        recs = self._records(lambda t: (1.0 + np.log1p(t)) * (1.0 + t))
        report = log_energy_check(recs)
        assert not report.passed
        assert report.slope > report.confidence


class TestInequalityRatios:
    def test_poincare_ratio_exact_on_pure_modes(self, grid, ops):
        for n in (1, 2):
            u = np.zeros((3,) + grid.shape)
            u[0] = np.sin(n * grid.z)[None, None, :] * np.ones(grid.shape)
            ratio = poincare_ratio(ops.fwd(u), ops)
            assert ratio == pytest.approx(1.0 / n, abs=1e-12)

    def test_poincare_bound_saturated_by_fundamental(self, grid, ops):
        u = np.zeros((3,) + grid.shape)
        u[0] = np.sin(grid.z)[None, None, :] * np.ones(grid.shape)
        assert poincare_ratio(ops.fwd(u), ops) <= grid.pitch * (1.0 + 1e-12)

    def test_poincare_requires_perp_part(self, grid, ops):
        u = np.zeros((3,) + grid.shape)
        u[2] = np.sin(2.0 * np.pi * grid.x / grid.Lx)[:, None, None] * np.ones(grid.shape)
        with pytest.raises(ValueError, match="nonzero"):
            poincare_ratio(ops.fwd(u), ops)

    def test_ladyzhenskaya_ratio_is_scale_invariant(self):
        # 32^3 resolves the sigma = 1.2 envelope below the helical gate
        grid = GridSpec.cube(32, 20.0, 1.0)
        ops = SpectralOps(grid)
        spec = PerturbationSpec(seed=3, amplitude=0.1, sigma=1.2)
        v_hat = random_helical_perturbation(spec, grid, ops)
        r1 = ladyzhenskaya_ratio(v_hat, ops)
        r2 = ladyzhenskaya_ratio(5.0 * v_hat, ops)
        assert r1 > 0.0
        assert r2 == pytest.approx(r1, rel=1e-12)

    def test_ladyzhenskaya_rejects_zero_field(self, grid, ops):
        with pytest.raises(ValueError, match="nonzero"):
            ladyzhenskaya_ratio(np.zeros((3,) + grid.spectral_shape, complex), ops)

    def test_ladyzhenskaya_rejects_non_helical_field(self, grid, ops):
        u = np.zeros((3,) + grid.shape)
        u[0] = np.sin(grid.z)[None, None, :] * np.ones(grid.shape)
        with pytest.raises(ValueError, match="helical"):
            ladyzhenskaya_ratio(ops.fwd(u), ops)

    def test_fitted_c0(self):
        assert fitted_c0([0.3, 0.5, 0.4], 2.0) == pytest.approx(2.0 * 0.5**4)
        with pytest.raises(ValueError, match="empty"):
            fitted_c0([], 1.0)


class TestSourceNorm:
    def test_chain_bound_dominates_for_seeded_field(self, ops, pert):
        report = source_norm(pert, ops)
        assert report.value > 0.0
        assert report.chain_factor > 0.0
        assert report.dominates()
        assert report.c0_required < DEFAULT_C0
        assert report.chain_bound == pytest.approx(
            np.sqrt(DEFAULT_C0) * report.chain_factor
        )

    def test_zero_field_has_zero_source(self, grid, ops):
        report = source_norm(np.zeros((3,) + grid.spectral_shape, complex), ops)
        assert report.value == 0.0
        assert report.c0_required == 0.0
        assert report.dominates()


class TestStructuralResiduals:
    def test_energy_identity_on_background_free_field(self, grid, ops, pert):
        # run states are dealiased on entry; the identity holds on that band
        v_hat = ops.dealias(pert)
        rhs = rhs_perturbation(v_hat, 0.0, grid, OseenParams(a=0.0), ops)
        assert energy_identity_residual(v_hat, rhs, ops) < 1e-12

    def test_energy_identity_zero_field(self, grid, ops):
        z = np.zeros((3,) + grid.spectral_shape, complex)
        assert energy_identity_residual(z, z, ops) == 0.0

    def test_orthogonal_split(self, ops, pert):
        assert orthogonal_split_residual(pert, ops) < 1e-12


class TestRecordBuilder:
    def test_stream_accumulates_enstrophy(self, grid, ops, pert):
        builder = RecordBuilder(grid, ops, a=1.0)
        rec0 = builder(SimulationState(grid=grid, t=0.0, v_hat=pert))
        rec1 = builder(SimulationState(grid=grid, t=0.5, v_hat=pert))
        assert rec0.cum_enstrophy == 0.0
        expected = 0.5 * rec0.l2_grad_v**2
        assert rec1.cum_enstrophy == pytest.approx(expected, rel=1e-12)
        assert rec0.circulation_a == 1.0
        assert rec0.sqrt_t_l2_grad_v == 0.0
        assert rec1.sqrt_t_l2_grad_v == pytest.approx(
            np.sqrt(0.5) * rec1.l2_grad_v, rel=1e-14
        )

    def test_inequality_columns_share_prefactor_ratio(self, grid, ops, pert):
        rec = RecordBuilder(grid, ops, a=0.5)(
            SimulationState(grid=grid, t=0.25, v_hat=pert)
        )
        assert rec.Kcal_perp == pytest.approx(4.5 * rec.K_perp, rel=1e-12)
        assert 0.0 <= rec.k_perp <= rec.K_perp
