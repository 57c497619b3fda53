"""Momentum-space machinery for the free Dirac equation on a periodic 1D grid.

Natural units (hbar = c = 1) throughout.  A state is a two-component complex
spinor sampled on N equispaced points of a box of length L; momentum space is
the FFT lattice p_j = 2*pi*j/L, j = -N/2 .. N/2-1.  The Dirac symbol
h(p) = p*alpha + m*beta has eigenvalues +-E(p) with E = sqrt(p^2 + m^2), and
the spectral projectors P_+- (p) = (1 +- h(p)/E(p)) / 2 split any field into
its positive- and negative-energy parts mode by mode.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigurationError, InvalidInputError, UndefinedFractionError

# Representation choice, confined to this module: alpha = sigma_x, beta = sigma_z.
ALPHA = np.array([[0.0, 1.0], [1.0, 0.0]])
BETA = np.array([[1.0, 0.0], [0.0, -1.0]])


@dataclass(frozen=True)
class SimulationParams:
    """Physical and discretization constants for one grid setup.

    mass         particle mass m > 0 (inverse length)
    box_length   periodic box length L > 0
    grid_points  even number of spatial samples N
    dt           time step; defaults to dx/2 and must not exceed dx
    """

    mass: float
    box_length: float
    grid_points: int
    dt: float | None = None

    def __post_init__(self):
        if self.mass <= 0:
            raise ConfigurationError(f"mass must be positive, got {self.mass}")
        if self.box_length <= 0:
            raise ConfigurationError(f"box_length must be positive, got {self.box_length}")
        n = self.grid_points
        if n <= 0 or n % 2 != 0:
            raise ConfigurationError(f"grid_points must be even and positive, got {n}")
        dx = self.box_length / n
        if dx * self.mass > 0.25 + 1e-12:
            raise ConfigurationError(
                f"dx*m = {dx * self.mass:.4g} exceeds 0.25; the Compton scale is unresolved"
            )
        if self.dt is None:
            object.__setattr__(self, "dt", 0.5 * dx)
        if self.dt <= 0 or self.dt > dx * (1 + 1e-12):
            raise ConfigurationError(f"dt must lie in (0, dx={dx:.4g}], got {self.dt}")

    @property
    def dx(self) -> float:
        return self.box_length / self.grid_points

    @property
    def nyquist(self) -> float:
        """Largest resolved |p|: pi/dx = pi*N/L."""
        return np.pi / self.dx

    @cached_property
    def positions(self) -> np.ndarray:
        """Grid points x_i = -L/2 + i*dx, i = 0..N-1."""
        x = -0.5 * self.box_length + self.dx * np.arange(self.grid_points)
        x.flags.writeable = False
        return x

    @cached_property
    def momentum_grid(self) -> "MomentumGrid":
        p = 2.0 * np.pi * np.fft.fftfreq(self.grid_points, d=self.dx)
        p.flags.writeable = False
        return MomentumGrid(values=p)

    @property
    def momenta(self) -> np.ndarray:
        """Momentum lattice in FFT mode order [0, 1, ..., -N/2, ..., -1]*2pi/L."""
        return self.momentum_grid.values


@dataclass(frozen=True)
class MomentumGrid:
    """The FFT momentum lattice p_j = 2*pi*j/L in FFT mode order."""

    values: np.ndarray

    @property
    def max_abs(self) -> float:
        return float(np.abs(self.values).max())


@dataclass(frozen=True)
class SpinorField:
    """Two-component complex field on the position grid, shape (N, 2).

    The physical norm is the dx-weighted l2 norm matching the |psi|^2 Born
    weight of spatial regions.  Instances are immutable; every operation
    returns a new field.
    """

    values: np.ndarray
    params: SimulationParams

    def __post_init__(self):
        v = np.array(self.values, dtype=np.complex128)
        if v.shape != (self.params.grid_points, 2):
            raise InvalidInputError(
                f"field shape {v.shape} does not match (N, 2) = ({self.params.grid_points}, 2)"
            )
        if not np.all(np.isfinite(v.view(np.float64))):
            raise InvalidInputError("field contains non-finite entries")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2).real * self.params.dx)

    @property
    def norm(self) -> float:
        return float(np.sqrt(self.norm_squared))

    def magnitude(self) -> np.ndarray:
        """Pointwise spinor magnitude sqrt(|u|^2 + |v|^2), shape (N,)."""
        return np.sqrt(np.sum(np.abs(self.values) ** 2, axis=1))

    def inner(self, other: "SpinorField") -> complex:
        """dx-weighted inner product <self, other>, antilinear in self."""
        return complex(np.sum(self.values.conj() * other.values) * self.params.dx)

    def normalize(self) -> "SpinorField":
        n = self.norm
        if n == 0.0:
            raise InvalidInputError("cannot normalize a zero field")
        return SpinorField(self.values / n, self.params)

    def __add__(self, other: "SpinorField") -> "SpinorField":
        return SpinorField(self.values + other.values, self.params)

    def __sub__(self, other: "SpinorField") -> "SpinorField":
        return SpinorField(self.values - other.values, self.params)

    def scaled(self, factor: complex) -> "SpinorField":
        return SpinorField(self.values * factor, self.params)


@dataclass(frozen=True)
class EnergySplit:
    """Decomposition field = plus + minus into the spectral halves of h(p)."""

    plus: SpinorField
    minus: SpinorField

    @property
    def total(self) -> SpinorField:
        return self.plus + self.minus


def dispersion(p, m):
    """Relativistic energy E(p) = sqrt(p^2 + m^2)."""
    return np.sqrt(np.asarray(p, dtype=float) ** 2 + m * m)


def dirac_symbol(p: float, m: float) -> np.ndarray:
    """2x2 momentum-space Hamiltonian h(p) = p*alpha + m*beta, eigenvalues +-E(p)."""
    return np.array([[m, p], [p, -m]], dtype=float)


def energy_projector(p: float, m: float, sign: int) -> np.ndarray:
    """Spectral projector P_sign(p) = (1 + sign*h(p)/E(p)) / 2 for sign in {+1, -1}."""
    if sign not in (1, -1):
        raise ConfigurationError(f"sign must be +1 or -1, got {sign}")
    e = dispersion(p, m)
    return 0.5 * (np.eye(2) + sign * dirac_symbol(p, m) / e)


def positive_spinor(p, m):
    """Unit eigenvector w_+(p) = (E+m, p)/sqrt(2E(E+m)) of h(p) with eigenvalue +E.

    Vectorized over p; returns shape p.shape + (2,).
    """
    p = np.asarray(p, dtype=float)
    e = dispersion(p, m)
    denom = np.sqrt(2.0 * e * (e + m))
    return np.stack([(e + m) / denom, p / denom], axis=-1)


def negative_spinor(p, m):
    """Unit eigenvector w_-(p) = (-p, E+m)/sqrt(2E(E+m)) of h(p) with eigenvalue -E."""
    p = np.asarray(p, dtype=float)
    e = dispersion(p, m)
    denom = np.sqrt(2.0 * e * (e + m))
    return np.stack([-p / denom, (e + m) / denom], axis=-1)


# The grid is centered (x_i = i*dx - L/2), so the plane wave exp(i p_j x) picks
# up an exact sign (-1)^j relative to the bare FFT kernel: p_j L/2 = pi*j.
def _half_box_twiddle(n: int) -> np.ndarray:
    t = np.ones(n)
    t[1::2] = -1.0
    return t


def field_from_momentum(params: SimulationParams, amplitudes: np.ndarray) -> SpinorField:
    """Assemble psi(x_i) = (1/N) sum_j A_j exp(i p_j x_i) from mode amplitudes.

    ``amplitudes`` has shape (N, 2) in FFT mode order.  No normalization is
    applied; callers usually follow with .normalize().
    """
    amps = np.asarray(amplitudes, dtype=np.complex128)
    tw = _half_box_twiddle(params.grid_points)
    return SpinorField(np.fft.ifft(amps * tw[:, None], axis=0), params)


def momentum_amplitudes(field: SpinorField) -> np.ndarray:
    """Inverse of field_from_momentum: mode amplitudes A_j, shape (N, 2)."""
    tw = _half_box_twiddle(field.params.grid_points)
    return np.fft.fft(field.values, axis=0) * tw[:, None]


def split_energy(field: SpinorField) -> EnergySplit:
    """Split a field into positive- and negative-energy parts, mode by mode.

    Forward FFT, apply P_+(p_j) / P_-(p_j) per mode, inverse FFT.  The two
    parts are orthogonal and reconstruct the input to FFT round-off.
    """
    params = field.params
    ahat = np.fft.fft(field.values, axis=0)
    p = params.momenta
    e = dispersion(p, params.mass)
    a = params.mass / e
    b = p / e
    plus0 = 0.5 * ((1.0 + a) * ahat[:, 0] + b * ahat[:, 1])
    plus1 = 0.5 * (b * ahat[:, 0] + (1.0 - a) * ahat[:, 1])
    plus_hat = np.stack([plus0, plus1], axis=1)
    minus_hat = ahat - plus_hat
    return EnergySplit(
        plus=SpinorField(np.fft.ifft(plus_hat, axis=0), params),
        minus=SpinorField(np.fft.ifft(minus_hat, axis=0), params),
    )


def negative_fraction(field: SpinorField) -> float:
    """Fraction of the squared norm carried by the negative-energy part."""
    total = field.norm_squared
    if total == 0.0:
        raise UndefinedFractionError("negative_fraction is undefined for a zero field")
    return split_energy(field).minus.norm_squared / total


def make_positive_packet(
    params: SimulationParams,
    center: float = 0.0,
    width: float = 2.0,
    momentum: float = 0.0,
) -> SpinorField:
    """Normalized Gaussian wave packet built entirely from positive-energy modes.

    Momentum profile exp(-width^2 (p - momentum)^2 / 2 - i p * center) riding on
    the spinor w_+(p), so negative_fraction vanishes to round-off by
    construction.  ``width`` is the position-space standard deviation.
    """
    if width <= params.dx:
        raise ConfigurationError(
            f"packet width {width} must exceed the grid spacing dx = {params.dx:.4g}"
        )
    if abs(momentum) >= params.nyquist - 3.0 / width:
        raise ConfigurationError(
            f"|momentum| = {abs(momentum)} is not spectrally contained "
            f"(needs |k0| < pi/dx - 3/width = {params.nyquist - 3.0 / width:.4g})"
        )
    p = params.momenta
    profile = np.exp(-0.5 * width * width * (p - momentum) ** 2 - 1j * p * center)
    amps = profile[:, None] * positive_spinor(p, params.mass)
    return field_from_momentum(params, amps).normalize()
