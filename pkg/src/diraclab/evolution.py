"""Time evolution of spinor fields and its diagnostics.

Free evolution is exact per momentum mode: exp(-i h(p) t) = cos(Et) - i
sin(Et) h(p)/E.  Potential coupling uses second-order Strang splitting with a
scalar (electric) potential V(x) acting as V(x) * identity on spinor indices.
The diagnostics quantify two fragile properties of positive-energy states:
light-cone support growth and invariance of the energy sign under the flow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, InvalidInputError
from .spectral import SimulationParams, SpinorField, dispersion, negative_fraction


@dataclass(frozen=True)
class PotentialProfile:
    """Real potential sampled on the grid, with its construction descriptor.

    ``kind`` is one of 'zero', 'box', 'gaussian-well'.  A box profile is
    exactly zero outside its declared region; that strict locality is what
    makes the fragility experiments meaningful.
    """

    values: np.ndarray
    kind: str
    parameters: dict

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if not np.all(np.isfinite(v)):
            raise InvalidInputError("potential contains non-finite entries")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def scaled(self, factor: float) -> "PotentialProfile":
        pars = dict(self.parameters)
        pars["scale"] = factor
        return PotentialProfile(self.values * factor, self.kind, pars)


@dataclass(frozen=True)
class CausalityReport:
    """Light-cone bookkeeping for one evolved field.

    support_radius   initial support radius R0 at the stated threshold
    elapsed_time     evolution time t
    threshold        relative amplitude threshold defining 'support'
    leaked_mass      fraction of |psi_t|^2 outside radius R0 + t
    within_horizon   False once R0 + t reaches L/2 (wrap-around invalidates
                     light-cone reasoning on a periodic grid)
    """

    support_radius: float
    elapsed_time: float
    threshold: float
    leaked_mass: float
    within_horizon: bool


def _wrapped_distance(x, center, box_length):
    d = np.abs(x - center)
    return np.minimum(d, box_length - d)


def zero_potential(params: SimulationParams) -> PotentialProfile:
    return PotentialProfile(np.zeros(params.grid_points), "zero", {})


def box_potential(
    params: SimulationParams, height: float, center: float = 0.0, half_width: float = 1.0
) -> PotentialProfile:
    """Sharp box of the given height on |x - center| <= half_width, zero elsewhere."""
    if half_width <= 0 or half_width >= 0.5 * params.box_length:
        raise ConfigurationError(f"box half_width {half_width} must lie in (0, L/2)")
    d = _wrapped_distance(params.positions, center, params.box_length)
    values = np.where(d <= half_width, height, 0.0)
    return PotentialProfile(
        values, "box", {"height": height, "center": center, "half_width": half_width}
    )


def gaussian_well(
    params: SimulationParams, depth: float, center: float = 0.0, width: float = 1.0
) -> PotentialProfile:
    """Smooth attractive well -depth * exp(-(x-center)^2 / (2 width^2))."""
    if width <= 0:
        raise ConfigurationError(f"gaussian width must be positive, got {width}")
    d = _wrapped_distance(params.positions, center, params.box_length)
    values = -depth * np.exp(-0.5 * (d / width) ** 2)
    return PotentialProfile(
        values, "gaussian-well", {"depth": depth, "center": center, "width": width}
    )


def _free_step_factors(params: SimulationParams, t: float):
    p = params.momenta
    e = dispersion(p, params.mass)
    phase = e * t
    cos_t = np.cos(phase)
    sin_t = np.sin(phase)
    return cos_t, sin_t * params.mass / e, sin_t * p / e


def _apply_free(values_hat: np.ndarray, cos_t, sin_a, sin_b) -> np.ndarray:
    u, v = values_hat[:, 0], values_hat[:, 1]
    out = np.empty_like(values_hat)
    out[:, 0] = cos_t * u - 1j * (sin_a * u + sin_b * v)
    out[:, 1] = cos_t * v - 1j * (sin_b * u - sin_a * v)
    return out


def evolve_free(field: SpinorField, t: float) -> SpinorField:
    """Exact free Dirac evolution by time t (unitary, spectrum-preserving)."""
    cos_t, sin_a, sin_b = _free_step_factors(field.params, t)
    ahat = np.fft.fft(field.values, axis=0)
    return SpinorField(np.fft.ifft(_apply_free(ahat, cos_t, sin_a, sin_b), axis=0), field.params)


def evolve_with_potential(
    field: SpinorField, potential: PotentialProfile, total_time: float, dt: float
) -> SpinorField:
    """Strang-split evolution under H = h(p) + V(x): half-kick, free step, half-kick.

    dt must divide total_time and must not exceed dx.  Each factor is unitary,
    so the norm is preserved to round-off regardless of the step count.
    """
    params = field.params
    if potential.values.shape != (params.grid_points,):
        raise ConfigurationError("potential grid does not match the field grid")
    if dt <= 0 or dt > params.dx * (1 + 1e-12):
        raise ConfigurationError(f"dt = {dt} must lie in (0, dx = {params.dx:.4g}]")
    n_steps = int(round(total_time / dt))
    if abs(n_steps * dt - total_time) > 1e-12 * max(1.0, abs(total_time)):
        raise ConfigurationError(f"dt = {dt} does not divide total_time = {total_time}")
    if n_steps == 0:
        return field

    half_kick = np.exp(-0.5j * dt * potential.values)[:, None]
    full_kick = half_kick * half_kick
    cos_t, sin_a, sin_b = _free_step_factors(params, dt)

    values = field.values * half_kick
    for step in range(n_steps):
        values = np.fft.ifft(
            _apply_free(np.fft.fft(values, axis=0), cos_t, sin_a, sin_b), axis=0
        )
        values = values * (half_kick if step == n_steps - 1 else full_kick)
    return SpinorField(values, params)


def fragility_scan(
    packet: SpinorField,
    shape: PotentialProfile,
    strengths,
    total_time: float,
    dt: float,
) -> list[tuple[float, float]]:
    """Negative-energy fraction acquired under the potential, per strength.

    ``shape`` is a unit-strength profile; each entry V0 of ``strengths``
    evolves the packet under V0 * shape for total_time and records
    negative_fraction of the result.  Strengths must be non-negative and
    ascending.  In the perturbative regime the fraction scales as V0^2.
    """
    strengths = [float(s) for s in strengths]
    if not strengths:
        raise ConfigurationError("fragility_scan needs at least one strength")
    if any(s < 0 for s in strengths) or any(
        b <= a for a, b in zip(strengths, strengths[1:])
    ):
        raise ConfigurationError("strengths must be non-negative and strictly ascending")
    table = []
    for v0 in strengths:
        evolved = evolve_with_potential(packet, shape.scaled(v0), total_time, dt)
        table.append((v0, negative_fraction(evolved)))
    return table


def causality_check(field: SpinorField, t: float, eps_supp: float = 1e-8) -> CausalityReport:
    """Measure how much mass escapes the light cone dilated from the support.

    The initial support radius R0 is the largest |x| where the amplitude
    reaches eps_supp relative to the field maximum; after free evolution to
    time t the report gives the |psi_t|^2 mass found beyond |x| = R0 + t.
    A horizon flag is cleared when R0 + t reaches L/2 and the periodic images
    start to contaminate the measurement.
    """
    if t < 0:
        raise ConfigurationError(f"evolution time must be non-negative, got {t}")
    if not (0 < eps_supp < 1):
        raise ConfigurationError(f"eps_supp must lie in (0, 1), got {eps_supp}")
    params = field.params
    mag = field.magnitude()
    peak = mag.max()
    if peak == 0.0:
        raise InvalidInputError("causality_check needs a nonzero field")
    supported = mag >= eps_supp * peak
    radius = float(np.abs(params.positions[supported]).max())
    cone = radius + t
    evolved = evolve_free(field, t)
    density = evolved.magnitude() ** 2 * params.dx
    outside = np.abs(params.positions) > cone
    leaked = float(density[outside].sum() / density.sum())
    return CausalityReport(
        support_radius=radius,
        elapsed_time=t,
        threshold=eps_supp,
        leaked_mass=leaked,
        within_horizon=bool(cone < 0.5 * params.box_length),
    )
