"""Truncated-Fock-space lattice model with a stochastic configuration jump process.

Hard-core particles live on an M-site ring; a configuration is the set of
occupied sites, with at most max_particles of them, and the state vector
assigns one complex amplitude per configuration across all particle-number
sectors.  The Hamiltonian hops particles between neighboring sites (amplitude
-kappa) and creates/annihilates a particle at one source site (amplitude g),
so with g > 0 the particle number is not conserved.

The jump process moves an actual configuration by stochastic transitions with
rate  sigma(q'|q) = max(0, 2 Im[conj(Psi(q')) H_{q'q} Psi(q)]) / |Psi(q)|^2,
which keeps an ensemble distributed as |Psi|^2 exactly when it starts so
(equivariance); the rate-balance identity wired into the tests is the
algebraic form of that statement.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, InvalidInputError, StrandedConfigurationError

# Below this squared amplitude the process has no defined velocity; the
# simulation aborts (single trajectories) or freezes the walker (ensembles).
_AMPLITUDE_FLOOR = 1e-300


@dataclass(frozen=True)
class LatticeConfig:
    """Ring size, sector truncation, and the two coupling constants."""

    sites: int
    max_particles: int
    hopping: float
    coupling: float
    source_site: int = 0

    def __post_init__(self):
        if self.sites < 2:
            raise ConfigurationError(f"need at least 2 sites, got {self.sites}")
        if not (0 <= self.max_particles <= self.sites):
            raise ConfigurationError(
                f"max_particles must lie in [0, {self.sites}], got {self.max_particles}"
            )
        if not (0 <= self.source_site < self.sites):
            raise ConfigurationError(f"source_site {self.source_site} is not on the lattice")


def configurations(lattice: LatticeConfig) -> tuple:
    """All admissible configurations: site subsets of size 0..max_particles.

    Ordered by particle number, then lexicographically; this order fixes the
    state-vector indexing everywhere.
    """
    out = []
    for n in range(lattice.max_particles + 1):
        out.extend(itertools.combinations(range(lattice.sites), n))
    return tuple(out)


def configuration_index(lattice: LatticeConfig) -> dict:
    return {cfg: i for i, cfg in enumerate(configurations(lattice))}


@dataclass(frozen=True)
class FockLatticeState:
    """Complex amplitudes over all admissible configurations."""

    amplitudes: np.ndarray
    lattice: LatticeConfig

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=np.complex128)
        dim = len(configurations(self.lattice))
        if amps.shape != (dim,):
            raise InvalidInputError(f"amplitude vector shape {amps.shape} != ({dim},)")
        if not np.all(np.isfinite(amps.view(np.float64))):
            raise InvalidInputError("amplitudes contain non-finite entries")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def normalize(self) -> "FockLatticeState":
        n2 = self.norm_squared
        if n2 == 0.0:
            raise InvalidInputError("cannot normalize a zero state")
        return FockLatticeState(self.amplitudes / np.sqrt(n2), self.lattice)

    def born(self) -> np.ndarray:
        """Normalized |Psi|^2 distribution over configurations."""
        w = np.abs(self.amplitudes) ** 2
        return w / w.sum()


def single_particle_state(lattice: LatticeConfig, site: int) -> FockLatticeState:
    """Normalized state with one particle at the given site."""
    index = configuration_index(lattice)
    key = (site,)
    if key not in index:
        raise ConfigurationError(f"one-particle configuration {key} is not admissible")
    amps = np.zeros(len(index), dtype=complex)
    amps[index[key]] = 1.0
    return FockLatticeState(amps, lattice)


def vacuum_state(lattice: LatticeConfig) -> FockLatticeState:
    amps = np.zeros(len(configurations(lattice)), dtype=complex)
    amps[0] = 1.0
    return FockLatticeState(amps, lattice)


def build_hamiltonian(lattice: LatticeConfig) -> np.ndarray:
    """Real symmetric Hamiltonian on configuration space.

    Hopping moves one particle to an empty neighboring site (each neighbor
    pair counted once, so the two-site ring has a single bond); the source
    term couples S to S +- {source_site} with amplitude g.  With g = 0 the
    matrix is block-diagonal across particle-number sectors.
    """
    configs = configurations(lattice)
    index = {cfg: i for i, cfg in enumerate(configs)}
    dim = len(configs)
    h = np.zeros((dim, dim))
    for i, cfg in enumerate(configs):
        occupied = set(cfg)
        for site in cfg:
            for nb in {(site + 1) % lattice.sites, (site - 1) % lattice.sites}:
                if nb not in occupied:
                    target = tuple(sorted(occupied - {site} | {nb}))
                    h[index[target], i] += -lattice.hopping
        s = lattice.source_site
        if s in occupied:
            target = tuple(sorted(occupied - {s}))
            h[index[target], i] += lattice.coupling
        elif len(cfg) + 1 <= lattice.max_particles:
            target = tuple(sorted(occupied | {s}))
            h[index[target], i] += lattice.coupling
    return h


class ExactPropagator:
    """Unitary flow exp(-iHt) through one eigendecomposition of H."""

    def __init__(self, hamiltonian: np.ndarray):
        self.eigenvalues, self.eigenvectors = np.linalg.eigh(hamiltonian)

    def apply(self, amplitudes: np.ndarray, t: float) -> np.ndarray:
        coeff = self.eigenvectors.conj().T @ amplitudes
        return self.eigenvectors @ (np.exp(-1j * self.eigenvalues * t) * coeff)

    def flow(self, amplitudes: np.ndarray, times: np.ndarray) -> np.ndarray:
        """State at each requested time, shape (len(times), dim)."""
        coeff = self.eigenvectors.conj().T @ amplitudes
        phases = np.exp(-1j * np.outer(times, self.eigenvalues))
        return (phases * coeff) @ self.eigenvectors.T


def schrodinger_step(
    state: FockLatticeState, hamiltonian: np.ndarray, dt: float
) -> FockLatticeState:
    """Advance the state by exp(-iH dt) (exact propagator, norm-preserving)."""
    if dt < 0:
        raise ConfigurationError(f"dt must be non-negative, got {dt}")
    amps = ExactPropagator(hamiltonian).apply(state.amplitudes, dt)
    return FockLatticeState(amps, state.lattice)


def _connections(hamiltonian: np.ndarray) -> list:
    conn = []
    for i in range(hamiltonian.shape[0]):
        nz = np.nonzero(hamiltonian[:, i])[0]
        conn.append([int(j) for j in nz if j != i])
    return conn


def jump_rates(state: FockLatticeState, source: tuple, hamiltonian: np.ndarray) -> dict:
    """Transition rates out of the given configuration, keyed by destination.

    Every H-connected destination appears, with rate
    max(0, 2 Im[conj(Psi(q')) H_{q'q} Psi(q)]) / |Psi(q)|^2.
    """
    configs = configurations(state.lattice)
    index = configuration_index(state.lattice)
    if source not in index:
        raise ConfigurationError(f"configuration {source} is not admissible")
    i = index[source]
    amps = state.amplitudes
    born = abs(amps[i]) ** 2
    if born < _AMPLITUDE_FLOOR:
        raise StrandedConfigurationError(
            f"zero amplitude at configuration {source}", configuration=source
        )
    rates = {}
    for j in np.nonzero(hamiltonian[:, i])[0]:
        if j == i:
            continue
        flow = 2.0 * (np.conj(amps[j]) * hamiltonian[j, i] * amps[i]).imag
        rates[configs[j]] = max(0.0, flow) / born
    return rates


@dataclass(frozen=True)
class Trajectory:
    """One realization of the jump process.

    records holds (time, configuration) pairs starting with (0, q0); each
    later record is a jump to an H-connected configuration.  max_step_hazard
    is the largest total_rate * dt encountered (should stay well below 1) and
    clipped_steps counts steps where it exceeded 1.
    """

    records: tuple
    final_time: float
    seed: int
    max_step_hazard: float
    clipped_steps: int

    @property
    def jump_count(self) -> int:
        return len(self.records) - 1

    @property
    def final_configuration(self) -> tuple:
        return self.records[-1][1]


def _step_count(total_time: float, dt: float) -> int:
    if dt <= 0:
        raise ConfigurationError(f"dt must be positive, got {dt}")
    n = int(round(total_time / dt))
    if abs(n * dt - total_time) > 1e-9 * max(1.0, abs(total_time)):
        raise ConfigurationError(f"dt = {dt} does not divide total_time = {total_time}")
    return n


def simulate_trajectory(
    lattice: LatticeConfig,
    psi0: FockLatticeState,
    q0: tuple,
    total_time: float,
    dt: float,
    seed: int,
) -> Trajectory:
    """Run one time-discretized jump trajectory in lockstep with the wave function.

    At each step the walker jumps to q' with probability sigma(q'|q) * dt,
    while Psi advances by the exact propagator.  The record is reproducible
    bit for bit from the seed.
    """
    configs = configurations(lattice)
    index = configuration_index(lattice)
    q0 = tuple(sorted(q0))
    if q0 not in index:
        raise ConfigurationError(f"initial configuration {q0} is not admissible")
    n_steps = _step_count(total_time, dt)
    h = build_hamiltonian(lattice)
    conn = _connections(h)
    flow = ExactPropagator(h).flow(psi0.amplitudes, dt * np.arange(n_steps + 1))

    rng = np.random.default_rng(seed)
    current = index[q0]
    records = [(0.0, q0)]
    max_hazard = 0.0
    clipped = 0
    for k in range(n_steps):
        psi = flow[k]
        born = abs(psi[current]) ** 2
        if born < _AMPLITUDE_FLOOR:
            raise StrandedConfigurationError(
                f"zero amplitude at configuration {configs[current]} at t = {k * dt:.6g}",
                time=k * dt,
                configuration=configs[current],
            )
        targets = conn[current]
        rates = np.array(
            [
                max(0.0, 2.0 * (np.conj(psi[j]) * h[j, current] * psi[current]).imag)
                for j in targets
            ]
        ) / born
        hazard = rates.sum() * dt
        max_hazard = max(max_hazard, hazard)
        if hazard > 1.0:
            clipped += 1
        if rng.random() < min(hazard, 1.0):
            r = rng.random() * rates.sum()
            current = targets[int(np.searchsorted(np.cumsum(rates), r))]
            records.append(((k + 1) * dt, configs[current]))
    return Trajectory(
        records=tuple(records),
        final_time=total_time,
        seed=seed,
        max_step_hazard=max_hazard,
        clipped_steps=clipped,
    )


@dataclass(frozen=True)
class EnsembleResult:
    """Vectorized ensemble run: final configurations plus jump bookkeeping."""

    lattice: LatticeConfig
    final_indices: np.ndarray
    jump_counts: np.ndarray
    event_times: np.ndarray
    event_trajectories: np.ndarray
    event_sources: np.ndarray
    event_destinations: np.ndarray
    born_final: np.ndarray
    max_step_hazard: float
    clipped_steps: int
    stranded_count: int

    @property
    def n_trajectories(self) -> int:
        return self.final_indices.size

    def empirical_distribution(self) -> np.ndarray:
        dim = len(configurations(self.lattice))
        return np.bincount(self.final_indices, minlength=dim) / self.n_trajectories

    def total_variation(self) -> float:
        return 0.5 * float(np.abs(self.empirical_distribution() - self.born_final).sum())

    def joint_region_fraction(self, region_a, region_b) -> float:
        """Empirical fraction of final configurations occupying both regions."""
        hits = _joint_region_mask(self.lattice, region_a, region_b)
        return float(hits[self.final_indices].mean())


def run_ensemble(
    lattice: LatticeConfig,
    psi0: FockLatticeState,
    initial_indices: np.ndarray,
    total_time: float,
    dt: float,
    seed,
) -> EnsembleResult:
    """Propagate many walkers against the shared wave-function flow.

    All trajectories read the same precomputed Psi(t_k) table; the per-step
    rate matrix is built once and every walker samples from it, so the run is
    deterministic given the seed and fast enough for 1e5 trajectories.
    Walkers reaching a zero-amplitude configuration are frozen and counted.
    """
    n_steps = _step_count(total_time, dt)
    configs = configurations(lattice)
    dim = len(configs)
    h = build_hamiltonian(lattice)
    flow = ExactPropagator(h).flow(psi0.amplitudes, dt * np.arange(n_steps + 1))

    state = np.array(initial_indices, dtype=np.intp)
    if state.ndim != 1 or state.min() < 0 or state.max() >= dim:
        raise ConfigurationError("initial_indices must be valid configuration indices")
    rng = np.random.default_rng(seed)
    jump_counts = np.zeros(state.size, dtype=np.int64)
    alive = np.ones(state.size, dtype=bool)
    ev_t, ev_traj, ev_src, ev_dst = [], [], [], []
    max_hazard = 0.0
    clipped = 0
    stranded = np.zeros(state.size, dtype=bool)

    for k in range(n_steps):
        psi = flow[k]
        born = np.abs(psi) ** 2
        num = 2.0 * ((psi.conj()[:, None] * h) * psi[None, :]).imag
        np.maximum(num, 0.0, out=num)
        ok = born > _AMPLITUDE_FLOOR
        rates = np.where(ok[None, :], num / np.where(ok, born, 1.0)[None, :], 0.0)
        total = rates.sum(axis=0)

        newly_stranded = alive & ~ok[state]
        if newly_stranded.any():
            stranded |= newly_stranded
            alive &= ~newly_stranded

        hazard = np.where(alive, total[state] * dt, 0.0)
        if hazard.size:
            max_hazard = max(max_hazard, float(hazard.max()))
        clipped += int(np.count_nonzero(hazard > 1.0))
        jump = rng.random(state.size) < np.minimum(hazard, 1.0)
        n_jump = int(np.count_nonzero(jump))
        if n_jump:
            with np.errstate(invalid="ignore", divide="ignore"):
                cum = np.cumsum(rates / np.where(total > 0, total, 1.0)[None, :], axis=0)
            sub = cum[:, state[jump]]
            r = rng.random(n_jump)
            dest = np.sum(sub < r[None, :], axis=0).clip(max=dim - 1)
            ev_t.append(np.full(n_jump, (k + 1) * dt))
            ev_traj.append(np.nonzero(jump)[0])
            ev_src.append(state[jump].copy())
            ev_dst.append(dest)
            state[jump] = dest
            jump_counts[jump] += 1

    def _cat(parts, dtype):
        return np.concatenate(parts) if parts else np.zeros(0, dtype=dtype)

    born_final = np.abs(flow[n_steps]) ** 2
    born_final = born_final / born_final.sum()
    return EnsembleResult(
        lattice=lattice,
        final_indices=state,
        jump_counts=jump_counts,
        event_times=_cat(ev_t, float),
        event_trajectories=_cat(ev_traj, np.intp),
        event_sources=_cat(ev_src, np.intp),
        event_destinations=_cat(ev_dst, np.intp),
        born_final=born_final,
        max_step_hazard=max_hazard,
        clipped_steps=clipped,
        stranded_count=int(np.count_nonzero(stranded)),
    )


@dataclass(frozen=True)
class EquivarianceResult:
    """Empirical-vs-Born comparison at the final time."""

    total_variation: float
    sampling_envelope: float
    empirical: np.ndarray
    born: np.ndarray
    ensemble: EnsembleResult


def equivariance_test(
    lattice: LatticeConfig,
    psi0: FockLatticeState,
    total_time: float,
    dt: float,
    n_trajectories: int,
    seed: int,
) -> EquivarianceResult:
    """Start walkers exactly |Psi_0|^2-distributed and compare the final histogram.

    The reported envelope is a three-sigma multinomial bound: were the
    dynamics exactly equivariant, the total-variation distance should stay
    below it up to rare fluctuations.
    """
    if n_trajectories < 1:
        raise ConfigurationError("need at least one trajectory")
    root = np.random.SeedSequence(seed)
    init_ss, run_ss = root.spawn(2)
    born0 = psi0.born()
    rng = np.random.default_rng(init_ss)
    initial = rng.choice(born0.size, size=n_trajectories, p=born0)
    result = run_ensemble(lattice, psi0, initial, total_time, dt, run_ss)
    empirical = result.empirical_distribution()
    born = result.born_final
    tv = 0.5 * float(np.abs(empirical - born).sum())
    envelope = 1.5 * float(np.sum(np.sqrt(born * (1 - born) / n_trajectories)))
    return EquivarianceResult(
        total_variation=tv,
        sampling_envelope=envelope,
        empirical=empirical,
        born=born,
        ensemble=result,
    )


def _joint_region_mask(lattice: LatticeConfig, region_a, region_b) -> np.ndarray:
    a = frozenset(int(s) for s in region_a)
    b = frozenset(int(s) for s in region_b)
    if not a or not b:
        raise ConfigurationError("both regions must contain at least one site")
    for s in a | b:
        if not (0 <= s < lattice.sites):
            raise ConfigurationError(f"site {s} is not on the lattice")
    if a & b:
        raise ConfigurationError(f"regions overlap on sites {sorted(a & b)}")
    configs = configurations(lattice)
    return np.array([bool(set(c) & a) and bool(set(c) & b) for c in configs])


def joint_region_probability(state: FockLatticeState, region_a, region_b) -> float:
    """Born probability that both site regions hold at least one particle.

    Zero for any state confined to the one-particle (or vacuum) sector;
    strictly positive once the source coupling has populated higher sectors.
    """
    hits = _joint_region_mask(state.lattice, region_a, region_b)
    return float(state.born()[hits].sum())
