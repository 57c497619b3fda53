"""Detector effect operators on the discretized one-particle space.

Two candidate families describe the Born weight of a spatial region for
positive-energy states: the plain indicator chi_Delta (a projection, but it
throws states out of the positive-energy subspace) and its compression
P+ chi_Delta P+ (which preserves the subspace but fails to commute for
disjoint regions).  Operators are dense Hermitian matrices on the
2N-dimensional spinor-grid space, flattened as index = 2*grid + component.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, InvalidInputError
from .localization import Region
from .spectral import SimulationParams, SpinorField, dispersion

INDICATOR = "indicator"
PROJECTED = "projected_indicator"


@dataclass(frozen=True)
class DetectorOperator:
    """Hermitian effect 0 <= D <= 1 attached to a region of the grid."""

    matrix: np.ndarray
    kind: str
    region: Region
    params: SimulationParams

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.complex128)
        dim = 2 * self.params.grid_points
        if m.shape != (dim, dim):
            raise ConfigurationError(f"operator shape {m.shape} != ({dim}, {dim})")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)


@dataclass(frozen=True)
class CommutatorReport:
    """Size of [D1, D2] for a pair of regions, with their separation."""

    region_a: Region
    region_b: Region
    gap: float
    commutator_norm: float
    operator_kind: str


def field_to_vector(field: SpinorField) -> np.ndarray:
    return field.values.reshape(-1)


def vector_to_field(vec: np.ndarray, params: SimulationParams) -> SpinorField:
    return SpinorField(vec.reshape(params.grid_points, 2), params)


def apply_operator(op: DetectorOperator, field: SpinorField) -> SpinorField:
    return vector_to_field(op.matrix @ field_to_vector(field), field.params)


def positive_projector_matrix(params: SimulationParams) -> np.ndarray:
    """Dense 2N x 2N matrix of the positive-energy projector.

    The projector is block-circulant: its position-space kernel K(x_i - x_k)
    is the inverse FFT of the per-mode 2x2 projectors, assembled here by
    index lookup.
    """
    n = params.grid_points
    p = params.momenta
    e = dispersion(p, params.mass)
    blocks = np.zeros((n, 2, 2), dtype=complex)
    blocks[:, 0, 0] = 0.5 * (1.0 + params.mass / e)
    blocks[:, 1, 1] = 0.5 * (1.0 - params.mass / e)
    blocks[:, 0, 1] = 0.5 * p / e
    blocks[:, 1, 0] = 0.5 * p / e
    kernel = np.fft.ifft(blocks, axis=0)  # K[d] couples x_i to x_{i-d}
    idx = np.arange(n)
    diff = (idx[:, None] - idx[None, :]) % n
    dense = kernel[diff]  # (n, n, 2, 2)
    dense = dense.transpose(0, 2, 1, 3).reshape(2 * n, 2 * n)
    return 0.5 * (dense + dense.conj().T)


def _indicator_diagonal(region: Region) -> np.ndarray:
    return np.repeat(region.mask().astype(float), 2)


def build_indicator(region: Region, params: SimulationParams) -> DetectorOperator:
    """Multiplication by the region indicator: a diagonal 0/1 projection."""
    if not region.mask().any():
        raise ConfigurationError("indicator region must be nonempty")
    matrix = np.diag(_indicator_diagonal(region)).astype(complex)
    return DetectorOperator(matrix, INDICATOR, region, params)


def build_projected_indicator(region: Region, params: SimulationParams) -> DetectorOperator:
    """Compression P+ chi_Delta P+ of the indicator to the positive-energy subspace.

    Positive semidefinite with norm <= 1, preserves the subspace, and gives
    exactly the region's Born weight on positive-energy states; unlike the
    plain indicator it is not a projection.
    """
    if not region.mask().any():
        raise ConfigurationError("indicator region must be nonempty")
    proj = positive_projector_matrix(params)
    chi = _indicator_diagonal(region)
    matrix = (proj * chi) @ proj  # P+ diag(chi) P+ without forming the diagonal matrix
    matrix = 0.5 * (matrix + matrix.conj().T)
    return DetectorOperator(matrix, PROJECTED, region, params)


def commutator_norm(d1: DetectorOperator, d2: DetectorOperator) -> CommutatorReport:
    """Largest singular value of [D1, D2], reported with the regions' gap."""
    if d1.matrix.shape != d2.matrix.shape:
        raise ConfigurationError("operators act on different spaces")
    comm = d1.matrix @ d2.matrix - d2.matrix @ d1.matrix
    norm = float(np.linalg.norm(comm, 2))
    gap = d1.region.index_gap(d2.region) * d1.params.dx
    kind = d1.kind if d1.kind == d2.kind else "mixed"
    return CommutatorReport(
        region_a=d1.region, region_b=d2.region, gap=gap,
        commutator_norm=norm, operator_kind=kind,
    )


def translate_operator(op: DetectorOperator, a: float) -> DetectorOperator:
    """Conjugate by the grid translation x -> x + a; a must be a multiple of dx."""
    steps_float = a / op.params.dx
    steps = int(round(steps_float))
    if abs(steps_float - steps) > 1e-9:
        raise ConfigurationError(f"translation {a} is not a multiple of dx = {op.params.dx:.4g}")
    n = op.params.grid_points
    four = op.matrix.reshape(n, 2, n, 2)
    four = np.roll(np.roll(four, steps, axis=0), steps, axis=2)
    return DetectorOperator(
        four.reshape(2 * n, 2 * n), op.kind, op.region.shifted(steps), op.params
    )


def click_probability(field: SpinorField, op: DetectorOperator) -> float:
    """Detection probability <psi, D psi> for a normalized state."""
    if abs(field.norm - 1.0) > 1e-10:
        raise InvalidInputError(f"state norm {field.norm} differs from 1 beyond 1e-10")
    vec = field_to_vector(field)
    value = complex(vec.conj() @ (op.matrix @ vec)) * field.params.dx
    if abs(value.imag) > 1e-10:
        raise InvalidInputError(f"expectation has imaginary part {value.imag:.3g}")
    prob = value.real
    if prob < -1e-10 or prob > 1.0 + 1e-10:
        raise InvalidInputError(f"expectation {prob} is outside [0, 1] beyond tolerance")
    return float(min(max(prob, 0.0), 1.0))
