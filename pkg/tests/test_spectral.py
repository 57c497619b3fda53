import numpy as np
import pytest

from diraclab import (
    ConfigurationError,
    InvalidInputError,
    SimulationParams,
    SpinorField,
    UndefinedFractionError,
    dirac_symbol,
    energy_projector,
    make_positive_packet,
    negative_fraction,
    split_energy,
)
from diraclab.spectral import (
    field_from_momentum,
    momentum_amplitudes,
    negative_spinor,
    positive_spinor,
)

from oracles import dense_negative_fraction, dense_projector, to_vector

PARAMS = SimulationParams(mass=1.0, box_length=40.0, grid_points=1024)
SMALL = SimulationParams(mass=1.0, box_length=8.0, grid_points=64)


def random_field(params, seed=0):
    rng = np.random.default_rng(seed)
    shape = (params.grid_points, 2)
    return SpinorField(rng.normal(size=shape) + 1j * rng.normal(size=shape), params)


class TestParams:
    def test_rejects_odd_grid(self):
        with pytest.raises(ConfigurationError):
            SimulationParams(1.0, 40.0, 1023)

    def test_rejects_unresolved_compton_scale(self):
        with pytest.raises(ConfigurationError):
            SimulationParams(1.0, 40.0, 64)  # dx = 0.625 > 0.25

    def test_rejects_large_dt(self):
        with pytest.raises(ConfigurationError):
            SimulationParams(1.0, 8.0, 64, dt=1.0)

    def test_default_dt_is_half_dx(self):
        p = SimulationParams(1.0, 8.0, 64)
        assert p.dt == pytest.approx(0.5 * p.dx)

    def test_momentum_grid_layout(self):
        p = SMALL
        grid = p.momentum_grid
        assert grid.max_abs == pytest.approx(np.pi * p.grid_points / p.box_length)
        sorted_p = np.sort(grid.values)
        # symmetric about zero except the unpaired Nyquist mode
        assert sorted_p[0] == pytest.approx(-grid.max_abs)
        assert np.allclose(sorted_p[1:], -sorted_p[1:][::-1], atol=1e-12)


class TestDiracSymbol:
    def test_rest_frame(self):
        h = dirac_symbol(0.0, 1.0)
        assert np.array_equal(h, np.diag([1.0, -1.0]))

    def test_three_four_five(self):
        # independent 2x2 eigensolve oracle
        eigvals = np.linalg.eigvalsh(dirac_symbol(3.0, 4.0))
        assert np.allclose(eigvals, [-5.0, 5.0], atol=1e-12)

    def test_even_in_momentum(self):
        for p in (0.3, 2.0, 17.5):
            ev_plus = np.linalg.eigvalsh(dirac_symbol(p, 1.0))
            ev_minus = np.linalg.eigvalsh(dirac_symbol(-p, 1.0))
            assert np.allclose(ev_plus, ev_minus, atol=1e-13)


class TestProjectors:
    def test_rest_frame_plus(self):
        assert np.allclose(energy_projector(0.0, 1.0, 1), np.diag([1.0, 0.0]), atol=1e-15)

    def test_trace_and_idempotence(self):
        proj = energy_projector(3.0, 4.0, 1)
        assert np.trace(proj) == pytest.approx(1.0, abs=1e-12)
        assert np.allclose(proj @ proj, proj, atol=1e-12)

    def test_bad_sign(self):
        with pytest.raises(ConfigurationError):
            energy_projector(1.0, 1.0, 0)

    def test_algebra_random_suite(self):
        # idempotence, completeness, orthogonality, eigenrelation
        rng = np.random.default_rng(2024)
        for _ in range(1000):
            p = rng.normal(0.0, 10.0)
            m = rng.uniform(0.05, 5.0)
            plus = energy_projector(p, m, 1)
            minus = energy_projector(p, m, -1)
            h = dirac_symbol(p, m)
            e = np.hypot(p, m)
            assert np.abs(plus @ plus - plus).max() < 1e-12
            assert np.abs(plus + minus - np.eye(2)).max() < 1e-12
            assert np.abs(plus @ minus).max() < 1e-12
            assert np.abs(h @ plus - e * plus).max() < 1e-12 * max(1.0, e)
            assert np.abs(h @ minus + e * minus).max() < 1e-12 * max(1.0, e)


def smooth_compact_bump(params, radius, center=0.0):
    u = (params.positions - center) / radius
    inside = np.abs(u) < 1.0
    profile = np.zeros(params.grid_points)
    profile[inside] = np.exp(1.0 - 1.0 / (1.0 - u[inside] ** 2))
    values = np.zeros((params.grid_points, 2), dtype=complex)
    values[:, 0] = profile
    return SpinorField(values, params).normalize()


class TestSplitEnergy:
    def test_round_trip_and_orthogonality(self):
        field = random_field(PARAMS, seed=1)
        split = split_energy(field)
        assert np.abs(split.total.values - field.values).max() < 1e-12
        assert abs(split.plus.inner(split.minus)) < 1e-10
        assert split.plus.norm_squared + split.minus.norm_squared == pytest.approx(
            field.norm_squared, abs=1e-10
        )

    def test_idempotence(self):
        field = random_field(PARAMS, seed=2)
        plus = split_energy(field).plus
        again = split_energy(plus)
        assert again.minus.norm < 1e-10

    def test_dense_oracle_small_grid(self):
        params = SimulationParams(1.0, 2.0, 8)
        field = random_field(params, seed=3)
        split = split_energy(field)
        oracle_plus = dense_projector(params, 1) @ to_vector(field)
        assert np.abs(to_vector(split.plus) - oracle_plus).max() < 1e-10

    def test_compact_bump_projection_everywhere_nonzero(self):
        # grid-level face of the no-compact-support property, N = 64 oracle config
        bump = smooth_compact_bump(SMALL, radius=1.0)
        split = split_energy(bump)
        oracle_plus = dense_projector(SMALL, 1) @ to_vector(bump)
        assert np.abs(to_vector(split.plus) - oracle_plus).max() < 1e-10
        mag = split.plus.magnitude()
        assert mag.min() > 1e-8 * mag.max()

    def test_nonfinite_rejected(self):
        values = np.zeros((PARAMS.grid_points, 2), dtype=complex)
        values[0, 0] = np.nan
        with pytest.raises(InvalidInputError):
            SpinorField(values, PARAMS)


class TestNegativeFraction:
    def test_positive_plane_wave(self):
        amps = np.zeros((SMALL.grid_points, 2), dtype=complex)
        j = 5
        amps[j] = positive_spinor(SMALL.momenta[j], SMALL.mass)
        field = field_from_momentum(SMALL, amps).normalize()
        assert negative_fraction(field) < 1e-12

    def test_equal_superposition(self):
        amps = np.zeros((SMALL.grid_points, 2), dtype=complex)
        j = 7
        amps[j] = positive_spinor(SMALL.momenta[j], SMALL.mass)
        amps[j] += negative_spinor(SMALL.momenta[j], SMALL.mass)
        field = field_from_momentum(SMALL, amps).normalize()
        assert negative_fraction(field) == pytest.approx(0.5, abs=1e-12)

    def test_truncated_packet_spectrum_violation(self):
        packet = make_positive_packet(SMALL, center=0.0, width=1.0, momentum=0.0)
        mask = np.abs(SMALL.positions) <= 1.5
        cut = SpinorField(packet.values * mask[:, None], SMALL)
        fraction = negative_fraction(cut)
        assert 0.0 < fraction < 1.0
        assert fraction == pytest.approx(dense_negative_fraction(cut), abs=1e-10)

    def test_zero_field_error(self):
        field = SpinorField(np.zeros((SMALL.grid_points, 2)), SMALL)
        with pytest.raises(UndefinedFractionError):
            negative_fraction(field)


class TestPositivePacket:
    def test_negative_fraction_tiny(self):
        packet = make_positive_packet(PARAMS, center=0.0, width=2.0, momentum=0.0)
        assert negative_fraction(packet) < 1e-10

    def test_rest_frame_spinor(self):
        assert np.allclose(positive_spinor(0.0, 1.0), [1.0, 0.0], atol=1e-15)

    def test_normalized(self):
        packet = make_positive_packet(PARAMS, center=3.0, width=1.5, momentum=2.0)
        assert packet.norm == pytest.approx(1.0, abs=1e-12)

    def test_width_validation(self):
        with pytest.raises(ConfigurationError):
            make_positive_packet(PARAMS, width=0.01)

    def test_momentum_containment_validation(self):
        with pytest.raises(ConfigurationError):
            make_positive_packet(PARAMS, width=2.0, momentum=PARAMS.nyquist)

    def test_boosted_packet_stays_positive(self):
        packet = make_positive_packet(PARAMS, center=-5.0, width=2.0, momentum=3.0)
        assert negative_fraction(packet) < 1e-10


class TestMomentumHelpers:
    def test_round_trip(self):
        field = random_field(SMALL, seed=9)
        amps = momentum_amplitudes(field)
        back = field_from_momentum(SMALL, amps)
        assert np.abs(back.values - field.values).max() < 1e-12

    def test_plane_wave_position_values(self):
        # single mode amplitude: psi(x) = exp(i p_j x) w / N
        j = 3
        amps = np.zeros((SMALL.grid_points, 2), dtype=complex)
        amps[j, 0] = 1.0
        field = field_from_momentum(SMALL, amps)
        expected = np.exp(1j * SMALL.momenta[j] * SMALL.positions) / SMALL.grid_points
        assert np.abs(field.values[:, 0] - expected).max() < 1e-13
