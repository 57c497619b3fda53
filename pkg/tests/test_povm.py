import numpy as np
import pytest

from diraclab import (
    ConfigurationError,
    InvalidInputError,
    Region,
    SimulationParams,
    build_indicator,
    build_projected_indicator,
    click_probability,
    commutator_norm,
    make_positive_packet,
    negative_fraction,
    translate_operator,
)
from diraclab.povm import apply_operator, positive_projector_matrix

from oracles import dense_negative_fraction, dense_projector

SMALL = SimulationParams(1.0, 8.0, 64)
LADDER = SimulationParams(1.0, 24.0, 128)


def whole_box(params):
    return Region(params.grid_points, ((0, params.grid_points),))


class TestIndicator:
    def test_whole_box_is_identity(self):
        op = build_indicator(whole_box(SMALL), SMALL)
        assert np.array_equal(op.matrix, np.eye(2 * SMALL.grid_points, dtype=complex))

    def test_disjoint_product_vanishes(self):
        region = Region.from_interval(SMALL, -2.0, 0.0)
        inside = build_indicator(region, SMALL)
        outside = build_indicator(region.complement(), SMALL)
        assert np.all(inside.matrix @ outside.matrix == 0.0)

    def test_projection_property(self):
        region = Region.from_interval(SMALL, -1.0, 2.0)
        op = build_indicator(region, SMALL)
        assert np.array_equal(op.matrix @ op.matrix, op.matrix)

    def test_truncation_violates_energy_sign(self):
        packet = make_positive_packet(SMALL, width=1.0)
        region = Region.from_interval(SMALL, -1.5, 1.5)
        cut = apply_operator(build_indicator(region, SMALL), packet)
        fraction = negative_fraction(cut)
        assert fraction > 1e-10
        assert fraction == pytest.approx(dense_negative_fraction(cut), abs=1e-10)


class TestProjectedIndicator:
    def test_whole_box_equals_projector(self):
        op = build_projected_indicator(whole_box(SMALL), SMALL)
        oracle = dense_projector(SMALL, 1)
        assert np.abs(op.matrix - oracle).max() < 1e-12

    def test_spectrum_within_unit_interval(self):
        region = Region.from_interval(SMALL, -2.0, 1.0)
        op = build_projected_indicator(region, SMALL)
        assert np.abs(op.matrix - op.matrix.conj().T).max() < 1e-12
        eigvals = np.linalg.eigvalsh(op.matrix)
        assert eigvals.min() > -1e-10
        assert eigvals.max() < 1.0 + 1e-10

    def test_preserves_positive_subspace(self):
        region = Region.from_interval(SMALL, -2.0, 1.0)
        op = build_projected_indicator(region, SMALL)
        proj = positive_projector_matrix(SMALL)
        leak = np.linalg.norm((np.eye(proj.shape[0]) - proj) @ op.matrix, 2)
        assert leak < 1e-10

    def test_born_weight_identity(self):
        packet = make_positive_packet(SMALL, width=1.0)
        region = Region.from_interval(SMALL, -1.0, 1.0)
        op = build_projected_indicator(region, SMALL)
        prob = click_probability(packet, op)
        weight = float(np.sum(packet.magnitude()[region.mask()] ** 2) * SMALL.dx)
        assert prob == pytest.approx(weight, abs=1e-10)

    def test_not_idempotent_on_proper_region(self):
        region = Region.from_interval(SMALL, -1.0, 1.0)
        op = build_projected_indicator(region, SMALL)
        assert np.linalg.norm(op.matrix @ op.matrix - op.matrix, 2) > 1e-3


class TestCommutators:
    def test_disjoint_indicators_commute_exactly(self):
        a = Region.from_interval(SMALL, -3.0, -1.0)
        b = Region.from_interval(SMALL, 1.0, 3.0)
        report = commutator_norm(build_indicator(a, SMALL), build_indicator(b, SMALL))
        assert report.commutator_norm == 0.0
        assert report.operator_kind == "indicator"

    def test_self_commutator_zero(self):
        region = Region.from_interval(SMALL, -1.0, 1.0)
        op = build_projected_indicator(region, SMALL)
        assert commutator_norm(op, op).commutator_norm == 0.0

    def test_projected_indicators_fail_local_commutativity(self):
        a = Region.from_interval(SMALL, -2.0, -0.5)
        b = Region.from_interval(SMALL, 0.5, 2.0)
        report = commutator_norm(
            build_projected_indicator(a, SMALL), build_projected_indicator(b, SMALL)
        )
        assert report.commutator_norm > 1e-10
        assert report.gap > 0

    def test_norm_decreases_along_gap_ladder(self):
        width = 2.0
        norms = []
        for gap in (0.75, 1.5, 2.25, 3.0):
            a = Region.from_interval(LADDER, -gap / 2 - width, -gap / 2)
            b = Region.from_interval(LADDER, gap / 2, gap / 2 + width)
            report = commutator_norm(
                build_projected_indicator(a, LADDER),
                build_projected_indicator(b, LADDER),
            )
            norms.append(report.commutator_norm)
        assert all(n > 1e-10 for n in norms)
        assert all(b < a for a, b in zip(norms, norms[1:]))


class TestTranslation:
    def test_zero_shift_is_identity(self):
        region = Region.from_interval(SMALL, -1.0, 1.0)
        op = build_indicator(region, SMALL)
        moved = translate_operator(op, 0.0)
        assert np.array_equal(moved.matrix, op.matrix)

    def test_full_box_shift_is_identity(self):
        region = Region.from_interval(SMALL, -1.0, 1.0)
        op = build_projected_indicator(region, SMALL)
        moved = translate_operator(op, SMALL.box_length)
        assert np.abs(moved.matrix - op.matrix).max() < 1e-12

    def test_indicator_translation_matches_region_shift_exactly(self):
        region = Region.from_interval(SMALL, -1.0, 1.0)
        shift = 3 * SMALL.dx
        moved = translate_operator(build_indicator(region, SMALL), shift)
        rebuilt = build_indicator(region.shifted(3), SMALL)
        assert np.array_equal(moved.matrix, rebuilt.matrix)

    def test_projected_translation_covariance(self):
        region = Region.from_interval(SMALL, -1.0, 0.5)
        for steps in (1, 7, 40):
            shift = steps * SMALL.dx
            moved = translate_operator(build_projected_indicator(region, SMALL), shift)
            rebuilt = build_projected_indicator(region.shifted(steps), SMALL)
            assert np.abs(moved.matrix - rebuilt.matrix).max() < 1e-10

    def test_off_grid_shift_rejected(self):
        region = Region.from_interval(SMALL, -1.0, 1.0)
        op = build_indicator(region, SMALL)
        with pytest.raises(ConfigurationError):
            translate_operator(op, 0.4 * SMALL.dx)


class TestClickProbability:
    def test_identity_operator(self):
        packet = make_positive_packet(SMALL, width=1.0)
        op = build_indicator(whole_box(SMALL), SMALL)
        assert click_probability(packet, op) == pytest.approx(1.0, abs=1e-12)

    def test_state_outside_region(self):
        packet = make_positive_packet(SMALL, center=-2.0, width=0.3)
        region = Region.from_interval(SMALL, 2.0, 3.5)
        op = build_indicator(region, SMALL)
        assert click_probability(packet, op) < 1e-10

    def test_additivity_on_disjoint_regions(self):
        packet = make_positive_packet(SMALL, width=1.0)
        a = Region.from_interval(SMALL, -2.0, -0.5)
        b = Region.from_interval(SMALL, 0.5, 2.0)
        union = Region(SMALL.grid_points, a.intervals + b.intervals)
        for build in (build_indicator, build_projected_indicator):
            together = click_probability(packet, build(union, SMALL))
            separate = click_probability(packet, build(a, SMALL)) + click_probability(
                packet, build(b, SMALL)
            )
            assert together == pytest.approx(separate, abs=1e-10)

    def test_partition_normalizes_to_identity(self):
        half = Region.from_interval(SMALL, -4.0, 0.0)
        parts = (half, half.complement())
        indicator_sum = sum(build_indicator(r, SMALL).matrix for r in parts)
        assert np.array_equal(indicator_sum, np.eye(2 * SMALL.grid_points, dtype=complex))
        projected_sum = sum(build_projected_indicator(r, SMALL).matrix for r in parts)
        assert np.abs(projected_sum - positive_projector_matrix(SMALL)).max() < 1e-12

    def test_rejects_unnormalized_state(self):
        packet = make_positive_packet(SMALL, width=1.0).scaled(2.0)
        op = build_indicator(whole_box(SMALL), SMALL)
        with pytest.raises(InvalidInputError):
            click_probability(packet, op)
