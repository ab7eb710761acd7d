"""Eight-vertex R-matrix, transfer matrix and XYZ Hamiltonian."""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .const import HERMITICITY_TOL, MAX_DENSE_SITES, REALNESS_TOL
from .elliptic import EVEN_CHAR, SIGMA_CHAR, EllipticParams
from .exceptions import HermiticityError, ParameterError

_LOGGER = logging.getLogger(__name__)

PAULI_0 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class BoundaryTwist(enum.Enum):
    """Boundary twist axis beta; PERIODIC is beta = 0."""

    PERIODIC = "p"
    X = "x"
    Y = "y"
    Z = "z"

    @classmethod
    def from_text(cls, text: str) -> BoundaryTwist:
        """Parse 'p', '0', 'x', 'y' or 'z'."""
        key = text.strip().lower()
        if key in ("0", "periodic"):
            key = "p"
        try:
            return cls(key)
        except ValueError as err:
            raise ParameterError(f"Unknown twist {text!r}") from err

    @property
    def delta_x(self) -> int:
        """Return the Kronecker delta for beta = x."""
        return int(self is BoundaryTwist.X)

    @property
    def delta_y(self) -> int:
        """Return the Kronecker delta for beta = y."""
        return int(self is BoundaryTwist.Y)

    @property
    def delta_z(self) -> int:
        """Return the Kronecker delta for beta = z."""
        return int(self is BoundaryTwist.Z)

    @property
    def delta_0(self) -> int:
        """Return the Kronecker delta for beta = 0."""
        return int(self is BoundaryTwist.PERIODIC)

    @property
    def twisted(self) -> int:
        """Return delta_x + delta_y + delta_z."""
        return self.delta_x + self.delta_y + self.delta_z

    @property
    def pauli(self) -> np.ndarray:
        """Return sigma^beta (identity for PERIODIC)."""
        return {
            BoundaryTwist.PERIODIC: PAULI_0,
            BoundaryTwist.X: PAULI_X,
            BoundaryTwist.Y: PAULI_Y,
            BoundaryTwist.Z: PAULI_Z,
        }[self]

    def boundary_sign(self, axis: str) -> int:
        """Return s with sigma^axis_{N+1} = s * sigma^axis_1."""
        if self is BoundaryTwist.PERIODIC or self.value == axis:
            return 1
        return -1


@dataclass(frozen=True)
class CouplingConstants:
    """Couplings jx, jy, jz of the XYZ bonds."""

    jx: complex
    jy: complex
    jz: complex

    @property
    def is_real(self) -> bool:
        """Return True if all couplings are real."""
        return all(np.imag(j) == 0 for j in (self.jx, self.jy, self.jz))

    @property
    def easy_axis(self) -> str:
        """Return the axis of the dominant coupling."""
        magnitudes = {"x": abs(self.jx), "y": abs(self.jy), "z": abs(self.jz)}
        return max(magnitudes, key=magnitudes.get)


def couplings(params: EllipticParams) -> CouplingConstants:
    """Return jx, jy, jz; imaginary round-off below REALNESS_TOL is dropped."""
    eta, tau = params.eta, params.tau
    phase = np.exp(1j * math.pi * eta)
    jx = phase * params.sigma(eta + tau / 2) / params.sigma(tau / 2)
    jy = phase * params.sigma(eta + (1 + tau) / 2) / params.sigma((1 + tau) / 2)
    jz = params.sigma(eta + 0.5) / params.sigma(0.5)
    values = [complex(jx), complex(jy), complex(jz)]
    scale = max(1.0, max(abs(v) for v in values))
    if all(abs(v.imag) < REALNESS_TOL * scale for v in values):
        values = [complex(v.real, 0.0) for v in values]
    else:
        _LOGGER.debug("Couplings keep imaginary parts at eta=%s: %s", eta, values)
    return CouplingConstants(*values)


def xxz_couplings(eta: float) -> CouplingConstants:
    """Return the trigonometric-limit couplings (1, 1, cos(pi eta))."""
    return CouplingConstants(1.0, 1.0, math.cos(math.pi * eta))


def r_weights(u: np.ndarray | complex, params: EllipticParams) -> tuple[np.ndarray, ...]:
    """Return the eight-vertex weights (alpha, beta, gamma, delta) at u."""
    u = np.asarray(u, dtype=complex)
    eta, mod = params.eta, 2 * params.tau
    odd_u = params.theta(SIGMA_CHAR, u, mod)
    odd_ue = params.theta(SIGMA_CHAR, u + eta, mod)
    even_u = params.theta(EVEN_CHAR, u, mod)
    even_ue = params.theta(EVEN_CHAR, u + eta, mod)
    even_0 = params.theta(EVEN_CHAR, 0.0, mod)
    odd_eta = params.theta(SIGMA_CHAR, eta, mod)
    even_eta = params.theta(EVEN_CHAR, eta, mod)

    alpha = even_u * odd_ue / (even_0 * odd_eta)
    beta = odd_u * even_ue / (even_0 * odd_eta)
    gamma = even_u * even_ue / (even_0 * even_eta)
    delta = odd_u * odd_ue / (even_0 * even_eta)
    return alpha, beta, gamma, delta


def r_matrix(u: complex, params: EllipticParams) -> np.ndarray:
    """Return R(u) in the basis |00>, |01>, |10>, |11>."""
    alpha, beta, gamma, delta = (complex(w) for w in r_weights(u, params))
    return np.array(
        [
            [alpha, 0, 0, delta],
            [0, beta, gamma, 0],
            [0, gamma, beta, 0],
            [delta, 0, 0, alpha],
        ],
        dtype=complex,
    )


@dataclass(frozen=True)
class SpinChainModel:
    """N sites, elliptic parameters, boundary twist and inhomogeneities."""

    n_sites: int
    params: EllipticParams
    twist: BoundaryTwist = BoundaryTwist.PERIODIC
    inhomogeneities: tuple[complex, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.n_sites < 2:
            raise ParameterError(f"Need at least 2 sites, got {self.n_sites}")
        thetas = tuple(complex(t) for t in self.inhomogeneities) or (0j,) * self.n_sites
        if len(thetas) != self.n_sites:
            raise ParameterError(f"Expected {self.n_sites} inhomogeneities, got {len(thetas)}")
        object.__setattr__(self, "inhomogeneities", thetas)
        if not self.params.strict:
            return
        if self.params.is_real_eta and any(t.real != 0 for t in thetas):
            raise ParameterError("Real eta requires pure imaginary inhomogeneities")
        if not self.params.is_real_eta and any(t.imag != 0 for t in thetas):
            raise ParameterError("Imaginary eta requires real inhomogeneities")

    @property
    def dimension(self) -> int:
        """Return 2**N."""
        return 1 << self.n_sites

    @property
    def is_homogeneous(self) -> bool:
        """Return True if every theta_j vanishes."""
        return all(t == 0 for t in self.inhomogeneities)

    def homogeneous(self) -> SpinChainModel:
        """Return a copy with theta_j = 0."""
        return replace(self, inhomogeneities=())

    def with_params(self, params: EllipticParams) -> SpinChainModel:
        """Return a copy at different elliptic parameters."""
        return replace(self, params=params)


def _check_dense(n_sites: int) -> None:
    if n_sites > MAX_DENSE_SITES:
        raise ParameterError(f"N={n_sites} exceeds the dense limit {MAX_DENSE_SITES}")


def twist_operator(twist: BoundaryTwist, n_sites: int) -> sp.csr_matrix:
    """Return U^beta = sigma^beta_1 ... sigma^beta_N as a sparse matrix."""
    _check_dense(n_sites)
    dim = 1 << n_sites
    index = np.arange(dim)
    ones = np.array([bin(i).count("1") for i in range(dim)])
    if twist is BoundaryTwist.PERIODIC:
        return sp.identity(dim, dtype=complex, format="csr")
    if twist is BoundaryTwist.Z:
        return sp.diags(np.where(ones % 2, -1.0, 1.0).astype(complex), format="csr")
    rows = index ^ (dim - 1)
    if twist is BoundaryTwist.X:
        data = np.ones(dim, dtype=complex)
    else:
        # sigma^y|0> = i|1>, sigma^y|1> = -i|0>
        powers = np.array([1, 1j, -1, -1j], dtype=complex)
        data = powers[(n_sites - ones) % 4] * powers[(3 * ones) % 4]
    return sp.csr_matrix((data, (rows, index)), shape=(dim, dim))


def apply_transfer(u_values: Sequence[complex] | np.ndarray, model: SpinChainModel, vectors: np.ndarray) -> np.ndarray:
    """
    Apply t(u) to a block of vectors for a batch of spectral parameters.

    The auxiliary space is contracted site by site, so the cost is
    O(P * N * 2^N * C) for P points and C columns.

    Args:
        u_values: Spectral parameters, shape (P,)
        model: Spin chain
        vectors: Array of shape (2^N,) or (2^N, C)

    Returns:
        Array of shape (P, 2^N) or (P, 2^N, C)
    """
    n = model.n_sites
    u = np.atleast_1d(np.asarray(u_values, dtype=complex))
    single = vectors.ndim == 1
    cols = vectors.reshape(model.dimension, -1).astype(complex)
    n_points, n_cols = u.size, cols.shape[1]

    shifted = u[:, None] - np.asarray(model.inhomogeneities)[None, :]
    if model.is_homogeneous:
        weights = [w[:, None] * np.ones((1, n)) for w in r_weights(u, model.params)]
    else:
        weights = [np.asarray(w).reshape(n_points, n) for w in r_weights(shifted.ravel(), model.params)]

    # axes: point, starting aux state, current aux state, physical index, column
    state = np.zeros((n_points, 2, 2, model.dimension, n_cols), dtype=complex)
    state[:, 0, 0] = cols
    state[:, 1, 1] = cols

    for site in range(1, n + 1):
        lo, hi = 1 << (site - 1), 1 << (n - site)
        view = state.reshape(n_points, 2, 2, hi, 2, lo, n_cols)
        alpha, beta, gamma, delta = (w[:, site - 1].reshape(n_points, 1, 1, 1, 1) for w in weights)
        x00, x01 = view[:, :, 0, :, 0], view[:, :, 0, :, 1]
        x10, x11 = view[:, :, 1, :, 0], view[:, :, 1, :, 1]
        new = np.empty_like(view)
        new[:, :, 0, :, 0] = alpha * x00 + delta * x11
        new[:, :, 1, :, 1] = delta * x00 + alpha * x11
        new[:, :, 0, :, 1] = beta * x01 + gamma * x10
        new[:, :, 1, :, 0] = gamma * x01 + beta * x10
        state = new.reshape(state.shape)

    twisted = np.einsum("ab,psbdc->psadc", model.twist.pauli, state)
    result = twisted[:, 0, 0] + twisted[:, 1, 1]
    if single:
        return result[..., 0]
    return result


def transfer_matrix(u: complex, model: SpinChainModel) -> np.ndarray:
    """Return t(u) as a dense matrix."""
    _check_dense(model.n_sites)
    return apply_transfer([u], model, np.eye(model.dimension, dtype=complex))[0]


def _bond_terms(
    n_sites: int, first: int, second: int, cpl: CouplingConstants, signs: tuple[int, int, int]
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return COO triplets of (1/2)(jx XX + jy YY + jz ZZ) on one bond."""
    dim = 1 << n_sites
    index = np.arange(dim)
    bit_a = (index >> first) & 1
    bit_b = (index >> second) & 1
    sx, sy, sz = signs
    jx, jy, jz = cpl.jx * sx, cpl.jy * sy, cpl.jz * sz

    diag = 0.5 * jz * (1 - 2 * bit_a) * (1 - 2 * bit_b)
    # sigma^y sigma^y gives -1 on equal bits, +1 on opposite bits
    off = np.where(bit_a == bit_b, 0.5 * (jx - jy), 0.5 * (jx + jy))
    flipped = index ^ ((1 << first) | (1 << second))
    rows = np.concatenate([index, flipped])
    cols = np.concatenate([index, index])
    data = np.concatenate([diag.astype(complex), off.astype(complex)])
    return rows, cols, data


def hamiltonian(model: SpinChainModel) -> sp.csr_matrix:
    """
    Return the XYZ Hamiltonian with the twisted boundary bond.

    Raises:
        HermiticityError: If the anti-Hermitian part exceeds HERMITICITY_TOL
    """
    _check_dense(model.n_sites)
    if not model.is_homogeneous:
        _LOGGER.warning("Hamiltonian requested for an inhomogeneous model; inhomogeneities are ignored")

    n = model.n_sites
    cpl = couplings(model.params)
    rows, cols, data = [], [], []
    for site in range(n):
        nxt = (site + 1) % n
        if nxt == 0:
            signs = tuple(model.twist.boundary_sign(axis) for axis in "xyz")
        else:
            signs = (1, 1, 1)
        r, c, d = _bond_terms(n, site, nxt, cpl, signs)
        rows.append(r)
        cols.append(c)
        data.append(d)

    dim = model.dimension
    ham = sp.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
    ).tocsr()
    ham.sum_duplicates()

    skew = ham - ham.conj().T
    residual = float(abs(skew).max()) if skew.nnz else 0.0
    if residual > HERMITICITY_TOL:
        raise HermiticityError(
            f"Hamiltonian is not Hermitian at eta={model.params.eta}: residual {residual:.3e}",
            residual=residual,
        )
    if residual > 0:
        ham = ((ham + ham.conj().T) * 0.5).tocsr()
    return ham


def hamiltonian_from_transfer(model: SpinChainModel, step: float = 1e-5) -> np.ndarray:
    """
    Rebuild H from the logarithmic derivative of t(u) at u = 0.

    The derivative is a central difference at step and step/2 combined by
    one Richardson extrapolation.
    """
    homog = model.homogeneous()
    params = homog.params
    t0 = transfer_matrix(0.0, homog)

    def central(h: float) -> np.ndarray:
        both = apply_transfer([h, -h], homog, np.eye(homog.dimension, dtype=complex))
        return (both[0] - both[1]) / (2 * h)

    derivative = (4 * central(step / 2) - central(step)) / 3
    log_derivative = np.linalg.solve(t0, derivative)
    shift = 0.5 * homog.n_sites * params.zeta(params.eta)
    return params.energy_scale * (log_derivative - shift * np.eye(homog.dimension))


def _embed(op: np.ndarray, positions: Sequence[int], n_spaces: int) -> np.ndarray:
    """Embed a two-site operator on the given tensor positions of n_spaces qubits."""
    full = np.zeros((1 << n_spaces, 1 << n_spaces), dtype=complex)
    a, b = positions
    tensor = op.reshape(2, 2, 2, 2)
    for col in range(1 << n_spaces):
        bits = [(col >> (n_spaces - 1 - k)) & 1 for k in range(n_spaces)]
        for out_a in range(2):
            for out_b in range(2):
                amp = tensor[out_a, out_b, bits[a], bits[b]]
                if amp == 0:
                    continue
                new_bits = list(bits)
                new_bits[a], new_bits[b] = out_a, out_b
                row = int("".join(map(str, new_bits)), 2)
                full[row, col] += amp
    return full


def qybe_residual(u1: complex, u2: complex, u3: complex, params: EllipticParams) -> float:
    """Return the norm of R12 R13 R23 - R23 R13 R12 on three spaces."""
    r12 = _embed(r_matrix(u1 - u2, params), (0, 1), 3)
    r13 = _embed(r_matrix(u1 - u3, params), (0, 2), 3)
    r23 = _embed(r_matrix(u2 - u3, params), (1, 2), 3)
    return float(np.linalg.norm(r12 @ r13 @ r23 - r23 @ r13 @ r12))


def z2_residual(u: complex, params: EllipticParams) -> float:
    """Return the largest commutator entry of R(u) with sigma^a x sigma^a."""
    rmat = r_matrix(u, params)
    worst = 0.0
    for pauli in (PAULI_X, PAULI_Y, PAULI_Z):
        pair = np.kron(pauli, pauli)
        worst = max(worst, float(np.max(np.abs(pair @ rmat - rmat @ pair))))
    return worst


def hamiltonian_symmetry_residuals(model: SpinChainModel) -> dict[str, float]:
    """Return max|H(eta) - H(-eta)| and max|H(eta) - H(eta + 2)|."""
    base = hamiltonian(model).toarray()
    out = {}
    for name, eta in (("reflection", -model.params.eta), ("shift", model.params.eta + 2)):
        other = replace(model.params, eta=eta, strict=False)
        shifted = replace(model, params=other, inhomogeneities=())
        out[name] = float(np.max(np.abs(hamiltonian(shifted).toarray() - base)))
    return out


def a_of(u: complex, model: SpinChainModel) -> complex:
    """Return a(u) = prod_l sigma(u - theta_l + eta) / sigma(eta)."""
    params = model.params
    thetas = np.asarray(model.inhomogeneities)
    values = params.sigma(u - thetas + params.eta) / params.sigma(params.eta)
    return complex(np.prod(values))


def d_of(u: complex, model: SpinChainModel) -> complex:
    """Return d(u) = a(u - eta)."""
    return a_of(u - model.params.eta, model)


def transfer_norm_bound(u_values: Sequence[complex] | np.ndarray, model: SpinChainModel) -> np.ndarray:
    """Return an upper bound on the operator norm of t(u) for each u."""
    u = np.atleast_1d(np.asarray(u_values, dtype=complex))
    shifted = u[:, None] - np.asarray(model.inhomogeneities)[None, :]
    alpha, beta, gamma, delta = (np.abs(w).reshape(shifted.shape) for w in r_weights(shifted.ravel(), model.params))
    local = np.maximum(alpha + delta, beta + gamma)
    return 2.0 * np.prod(local, axis=1)
