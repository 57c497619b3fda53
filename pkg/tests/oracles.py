"""Independent reference constructions shared across the test suite.

Everything here deliberately avoids the library's FFT code paths: explicit
DFT matrices, per-mode eigensolves, dense matrix exponentials, high-order ODE
integration, and quadrature of continuum integrals.
"""

import numpy as np

from diraclab import SpinorField


def dft_matrix(n: int) -> np.ndarray:
    j = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(j, j) / n) / np.sqrt(n)


def spinor_dft(params) -> np.ndarray:
    """Unitary grid-to-mode map on the flattened (2N) spinor space."""
    return np.kron(dft_matrix(params.grid_points), np.eye(2))


def dense_projector(params, sign: int = 1) -> np.ndarray:
    """Dense 2N x 2N energy projector from per-mode 2x2 eigensolves."""
    n = params.grid_points
    p = params.momenta
    m = params.mass
    blocks = np.zeros((2 * n, 2 * n), dtype=complex)
    for j in range(n):
        h = np.array([[m, p[j]], [p[j], -m]])
        eigvals, eigvecs = np.linalg.eigh(h)
        column = 1 if sign > 0 else 0  # eigh sorts ascending
        v = eigvecs[:, column]
        blocks[2 * j: 2 * j + 2, 2 * j: 2 * j + 2] = np.outer(v, v.conj())
    w = spinor_dft(params)
    dense = w.conj().T @ blocks @ w
    return 0.5 * (dense + dense.conj().T)


def dense_hamiltonian(params, potential=None) -> np.ndarray:
    """Dense 2N x 2N Dirac Hamiltonian, optionally with a scalar potential."""
    n = params.grid_points
    p = params.momenta
    m = params.mass
    blocks = np.zeros((2 * n, 2 * n), dtype=complex)
    for j in range(n):
        blocks[2 * j: 2 * j + 2, 2 * j: 2 * j + 2] = np.array([[m, p[j]], [p[j], -m]])
    w = spinor_dft(params)
    dense = w.conj().T @ blocks @ w
    if potential is not None:
        dense = dense + np.diag(np.repeat(np.asarray(potential, dtype=float), 2))
    return 0.5 * (dense + dense.conj().T)


def to_vector(field: SpinorField) -> np.ndarray:
    return field.values.reshape(-1)


def to_field(vector: np.ndarray, params) -> SpinorField:
    return SpinorField(vector.reshape(params.grid_points, 2), params)


def dense_negative_fraction(field: SpinorField) -> float:
    """Negative-energy fraction through the dense projector, no FFTs."""
    minus = dense_projector(field.params, sign=-1)
    vec = to_vector(field)
    cut = minus @ vec
    return float(np.vdot(cut, cut).real / np.vdot(vec, vec).real)


def nw_profile_quadrature(x: float, mass: float = 1.0):
    """Continuum profile of the maximally localized positive-energy state at x > 0.

    Oscillatory-weight quadrature of the two spinor components; the even part
    drops its delta contribution, which lives at the origin only.
    """
    from scipy.integrate import quad

    def energy(p):
        return np.hypot(p, mass)

    def even_part(p):
        e = energy(p)
        return np.sqrt((e + mass) / (2 * e)) - 1 / np.sqrt(2)

    def odd_part(p):
        e = energy(p)
        return p / np.sqrt(2 * e * (e + mass))

    c1, _ = quad(even_part, 0, np.inf, weight="cos", wvar=x, limit=400)
    c2, _ = quad(odd_part, 0, np.inf, weight="sin", wvar=x, limit=400)
    return np.hypot(c1 / np.pi, c2 / np.pi)


def master_equation_step(rho, psi, hamiltonian, dt):
    """One step of the classical master equation with the discrete jump kernel.

    Uses the same transition probabilities the sampler uses, so an ensemble of
    walkers must reproduce this flow up to Monte-Carlo noise.
    """
    num = 2.0 * ((psi.conj()[:, None] * hamiltonian) * psi[None, :]).imag
    pos = np.maximum(num, 0.0)
    born = np.abs(psi) ** 2
    ok = born > 1e-300
    rates = np.where(ok[None, :], pos / np.where(ok, born, 1.0)[None, :], 0.0)
    out_rate = rates.sum(axis=0)
    p_jump = np.minimum(out_rate * dt, 1.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        kernel = rates / np.where(out_rate > 0, out_rate, 1.0)[None, :]
    new_rho = rho * (1.0 - p_jump) + kernel @ (rho * p_jump)
    expected_jumps = float((rho * p_jump).sum())
    return new_rho, expected_jumps
