"""Hilbert-space toolkit for signalscope.

This module provides the small amount of complex linear algebra the signaling
protocol needs: pure states over labeled composite spaces, density matrices,
tensor and inner products, partial traces, von Neumann entropy and the Schmidt
decomposition. Dimensions are tiny (at most 8 per subsystem), so everything is
dense numpy.
"""

import logging
from dataclasses import dataclass
from math import prod
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple

import numpy as np
import scipy.linalg
from scipy.special import entr

logger = logging.getLogger(__name__)

NORM_TOLERANCE = 1e-12
HERMITIAN_TOLERANCE = 1e-12
EIGENVALUE_FLOOR = -1e-12
ENTROPY_EIGENVALUE_FLOOR = -1e-9
SCHMIDT_CUTOFF = 1e-12

LN2 = np.log(2.0)


def _as_dims(dims: Sequence[int]) -> Tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 1 for d in dims):
        raise ValueError(f"Subsystem dimensions must be positive integers, got {dims}")
    return dims


@dataclass(frozen=True, eq=False)
class PureState:
    """Unit vector over a composite Hilbert space.

    Attributes:
        amplitudes (np.ndarray): Complex amplitude vector, read-only.
        dims (Tuple[int, ...]): Subsystem dimensions; their product is the vector length.
    """

    amplitudes: np.ndarray
    dims: Tuple[int, ...]

    def __post_init__(self):
        amplitudes = np.array(self.amplitudes, dtype=complex).reshape(-1)
        dims = _as_dims(self.dims)
        if prod(dims) != amplitudes.size:
            raise ValueError(
                f"Dimensions {dims} do not match amplitude vector of length {amplitudes.size}"
            )
        norm = np.linalg.norm(amplitudes)
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise ValueError(f"State is not normalized: norm = {norm!r}")
        amplitudes.setflags(write=False)
        object.__setattr__(self, "amplitudes", amplitudes)
        object.__setattr__(self, "dims", dims)

    @classmethod
    def from_vector(
        cls, vector: Sequence[complex], dims: Optional[Sequence[int]] = None, normalize: bool = False
    ) -> "PureState":
        """Build a state from a raw vector.

        Args:
            vector: Complex amplitudes.
            dims: Subsystem dimensions. Defaults to a single subsystem.
            normalize: Divide by the Euclidean norm before validation.

        Returns:
            PureState: The validated state.

        Raises:
            ValueError: If the vector is zero or (without normalize) not unit length.
        """
        vector = np.array(vector, dtype=complex).reshape(-1)
        if normalize:
            norm = np.linalg.norm(vector)
            if norm == 0.0:
                raise ValueError("Cannot normalize the zero vector")
            vector = vector / norm
        return cls(vector, tuple(dims) if dims is not None else (vector.size,))

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())


@dataclass(frozen=True, eq=False)
class AppliedVector:
    """Unnormalized vector produced by applying an operator to part of a state.

    Attributes:
        amplitudes (np.ndarray): Resulting amplitudes.
        dims (Tuple[int, ...]): Subsystem dimensions, unchanged from the input state.
        norm (float): Euclidean norm of the amplitudes.
    """

    amplitudes: np.ndarray
    dims: Tuple[int, ...]
    norm: float

    def to_state(self, tolerance: Optional[float] = None) -> PureState:
        """Convert to a PureState, renormalizing.

        Args:
            tolerance: If given, the norm must already be within this distance of 1.

        Raises:
            ValueError: If the vector is zero or its norm is outside the tolerance.
        """
        if tolerance is not None and abs(self.norm - 1.0) > tolerance:
            raise ValueError(
                f"Vector norm {self.norm!r} deviates from 1 by more than {tolerance}"
            )
        return PureState.from_vector(self.amplitudes, self.dims, normalize=True)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Positive semidefinite, unit-trace operator with subsystem labels.

    Attributes:
        entries (np.ndarray): Square complex matrix, read-only.
        dims (Tuple[int, ...]): Subsystem dimensions.
    """

    entries: np.ndarray
    dims: Tuple[int, ...]

    def __post_init__(self):
        entries = np.array(self.entries, dtype=complex)
        dims = _as_dims(self.dims)
        size = prod(dims)
        if entries.shape != (size, size):
            raise ValueError(f"Matrix shape {entries.shape} does not match dimensions {dims}")
        if np.max(np.abs(entries - entries.conj().T)) > HERMITIAN_TOLERANCE:
            raise ValueError("Density matrix is not Hermitian")
        trace = np.trace(entries).real
        if abs(trace - 1.0) > NORM_TOLERANCE:
            raise ValueError(f"Density matrix trace is {trace!r}, expected 1")
        smallest = scipy.linalg.eigvalsh(entries)[0]
        if smallest < EIGENVALUE_FLOOR:
            raise ValueError(f"Density matrix has negative eigenvalue {smallest!r}")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "dims", dims)

    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues in ascending order."""
        return scipy.linalg.eigvalsh(self.entries)


def basis_state(dim: int, index: int) -> PureState:
    """Computational basis vector |index> of a dim-dimensional space."""
    if not 0 <= index < dim:
        raise ValueError(f"Basis index {index} out of range for dimension {dim}")
    vector = np.zeros(dim, dtype=complex)
    vector[index] = 1.0
    return PureState(vector, (dim,))


def random_state(dims: Sequence[int], rng: np.random.Generator) -> PureState:
    """Haar-random pure state over the given subsystem dimensions."""
    size = prod(_as_dims(dims))
    vector = rng.normal(size=size) + 1j * rng.normal(size=size)
    return PureState.from_vector(vector, dims, normalize=True)


def tensor(u: PureState, v: PureState) -> PureState:
    """Tensor product u ⊗ v; dims are concatenated."""
    return PureState(np.kron(u.amplitudes, v.amplitudes), u.dims + v.dims)


def inner(u: PureState, v: PureState) -> complex:
    """Inner product <u|v>, conjugate-linear in u.

    Raises:
        ValueError: If the total dimensions differ.
    """
    if u.dim != v.dim:
        raise ValueError(f"Dimension mismatch in inner product: {u.dim} vs {v.dim}")
    return complex(np.vdot(u.amplitudes, v.amplitudes))


def density_from_pure(states: Sequence[PureState], weights: Sequence[float]) -> DensityMatrix:
    """Mixture Σ w_k |s_k><s_k|.

    Args:
        states: Pure states, all with the same dims.
        weights: Probability weights, one per state.

    Returns:
        DensityMatrix: The mixed state.

    Raises:
        ValueError: If weights are negative, do not sum to 1, or dims disagree.
    """
    if len(states) != len(weights) or not states:
        raise ValueError("Need one weight per state and at least one state")
    weights = np.asarray(weights, dtype=float)
    if np.any(weights < 0):
        raise ValueError(f"Weights must be nonnegative, got {weights.tolist()}")
    if abs(weights.sum() - 1.0) > NORM_TOLERANCE:
        raise ValueError(f"Weights sum to {weights.sum()!r}, expected 1")
    dims = states[0].dims
    if any(s.dims != dims for s in states):
        raise ValueError("All states in a mixture must share the same dims")
    entries = sum(w * s.projector() for s, w in zip(states, weights))
    return DensityMatrix(entries, dims)


def _keep_indices(keep: Sequence[int], count: int) -> List[int]:
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ValueError("At least one subsystem must be kept")
    for k in keep:
        if not 0 <= k < count:
            raise ValueError(f"Subsystem index {k} out of range [0, {count - 1}]")
    return keep


def partial_trace(rho: DensityMatrix, keep: Sequence[int]) -> DensityMatrix:
    """Reduced state on the kept subsystems (in ascending index order).

    Raises:
        ValueError: If keep is empty or holds an invalid index.
    """
    dims = rho.dims
    n = len(dims)
    keep = _keep_indices(keep, n)
    drop = [i for i in range(n) if i not in keep]
    kept_dim = prod(dims[i] for i in keep)
    dropped_dim = prod(dims[i] for i in drop)

    tensor_form = rho.entries.reshape(dims + dims)
    order = keep + drop
    tensor_form = tensor_form.transpose(order + [i + n for i in order])
    matrix = tensor_form.reshape(kept_dim, dropped_dim, kept_dim, dropped_dim)
    reduced = np.trace(matrix, axis1=1, axis2=3)
    # restore exact Hermiticity lost to summation order
    reduced = (reduced + reduced.conj().T) / 2
    return DensityMatrix(reduced, tuple(dims[i] for i in keep))


def purity(rho: DensityMatrix) -> float:
    """tr(ρ²)."""
    return float(np.real(np.trace(rho.entries @ rho.entries)))


def _entropy_bits(probabilities: np.ndarray) -> float:
    return float(np.sum(entr(probabilities)) / LN2)


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """Von Neumann entropy in bits, with 0·log 0 = 0.

    Raises:
        ValueError: If an eigenvalue is below -1e-9 (not a state).
    """
    eigenvalues = rho.eigenvalues()
    logger.debug(f"Entropy eigenvalues: {eigenvalues}")
    if eigenvalues[0] < ENTROPY_EIGENVALUE_FLOOR:
        raise ValueError(f"Not a state: eigenvalue {eigenvalues[0]!r}")
    return _entropy_bits(np.clip(eigenvalues, 0.0, None))


def binary_entropy(p: float) -> float:
    """Shannon entropy H(p) of a two-outcome distribution, in bits.

    Values within 1e-12 outside [0, 1] are clamped.

    Raises:
        ValueError: If p is further outside [0, 1].
    """
    if p < -NORM_TOLERANCE or p > 1.0 + NORM_TOLERANCE:
        raise ValueError(f"Probability {p!r} outside [0, 1]")
    p = min(max(float(p), 0.0), 1.0)
    return _entropy_bits(np.array([p, 1.0 - p]))


@dataclass(frozen=True, eq=False)
class SchmidtForm:
    """Schmidt decomposition Σ c_k |l_k>|r_k> across a bipartition.

    Attributes:
        coefficients (np.ndarray): Descending nonnegative reals, squares summing to 1.
        left_basis (Tuple[np.ndarray, ...]): Orthonormal vectors on the left part.
        right_basis (Tuple[np.ndarray, ...]): Orthonormal vectors on the right part.
        left_dims (Tuple[int, ...]): Dimensions of the left subsystems.
        right_dims (Tuple[int, ...]): Dimensions of the right subsystems.
    """

    coefficients: np.ndarray
    left_basis: Tuple[np.ndarray, ...]
    right_basis: Tuple[np.ndarray, ...]
    left_dims: Tuple[int, ...]
    right_dims: Tuple[int, ...]

    def reconstruct(self) -> np.ndarray:
        """Amplitudes Σ c_k l_k ⊗ r_k, ordered left subsystems first."""
        return sum(
            c * np.kron(left, right)
            for c, left, right in zip(self.coefficients, self.left_basis, self.right_basis)
        )


def _lexicographic_key(vector: np.ndarray) -> Tuple[float, ...]:
    return tuple(x for z in vector for x in (round(z.real, 12), round(z.imag, 12)))


def schmidt_decompose(state: PureState, left: Sequence[int]) -> SchmidtForm:
    """Schmidt decomposition of a pure state across the cut left | rest.

    Each left vector is phased so its first nonzero amplitude is real and
    nonnegative; equal coefficients are ordered by the left vectors'
    amplitudes.

    Args:
        state: The state to decompose.
        left: Subsystem indices forming the left part; the rest form the right part.

    Returns:
        SchmidtForm: Coefficients above 1e-12 with their basis vectors.
    """
    dims = state.dims
    n = len(dims)
    left = _keep_indices(left, n)
    right = [i for i in range(n) if i not in left]
    if not right:
        raise ValueError("Cut must leave at least one subsystem on the right")
    left_dims = tuple(dims[i] for i in left)
    right_dims = tuple(dims[i] for i in right)

    matrix = (
        state.amplitudes.reshape(dims)
        .transpose(left + right)
        .reshape(prod(left_dims), prod(right_dims))
    )
    u, singular_values, vh = np.linalg.svd(matrix)

    terms = []
    for k, c in enumerate(singular_values):
        if c <= SCHMIDT_CUTOFF:
            continue
        left_vec = u[:, k].copy()
        right_vec = vh[k, :].copy()
        pivot = left_vec[np.argmax(np.abs(left_vec) > SCHMIDT_CUTOFF)]
        phase = pivot / abs(pivot)
        terms.append((float(c), left_vec / phase, right_vec * phase))

    terms.sort(key=lambda t: (-round(t[0], 12), _lexicographic_key(t[1])))
    coefficients = np.array([t[0] for t in terms])
    return SchmidtForm(
        coefficients=coefficients,
        left_basis=tuple(t[1] for t in terms),
        right_basis=tuple(t[2] for t in terms),
        left_dims=left_dims,
        right_dims=right_dims,
    )


def apply_on_subsystem(
    op: np.ndarray, state: PureState, targets: Sequence[int]
) -> AppliedVector:
    """Apply op to the target subsystems, identity elsewhere.

    The result is not renormalized; non-unitary operators may change the norm
    and the caller must see that.

    Args:
        op: Square matrix acting on the targets, in the order given.
        state: Input state.
        targets: Subsystem indices the operator acts on.

    Returns:
        AppliedVector: The resulting vector and its norm.

    Raises:
        ValueError: If op does not match the product of target dimensions.
    """
    dims = state.dims
    n = len(dims)
    targets = [int(t) for t in targets]
    if not targets or len(set(targets)) != len(targets):
        raise ValueError(f"Invalid target subsystems {targets}")
    for t in targets:
        if not 0 <= t < n:
            raise ValueError(f"Subsystem index {t} out of range [0, {n - 1}]")
    op = np.asarray(op, dtype=complex)
    target_dim = prod(dims[t] for t in targets)
    if op.shape != (target_dim, target_dim):
        raise ValueError(
            f"Operator shape {op.shape} does not match target dimension {target_dim}"
        )

    rest = [i for i in range(n) if i not in targets]
    order = targets + rest
    moved = state.amplitudes.reshape(dims).transpose(order).reshape(target_dim, -1)
    result = (op @ moved).reshape([dims[i] for i in order])
    result = result.transpose(np.argsort(order)).reshape(-1)
    return AppliedVector(result, dims, float(np.linalg.norm(result)))
