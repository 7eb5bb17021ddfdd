"""Brute-force fidelity oracles for signalscope.

The cone formula in `machines` claims the best quantum cloner or deleter. This
module checks that claim by direct numerical search: once over every output
pair with the Gram matrix unitarity forces, and once over unitaries written as
matrix exponentials of Hermitian generators. It also searches one-sided local
filters, which confirms the success probability the experiment planner uses.

Every search is a local optimizer run from several seeded random starts; the
best restart wins, ties going to the lowest restart index.
"""

import logging
from dataclasses import dataclass
from typing import Callable
from typing import List
from typing import Optional
from typing import Tuple
from typing import Union

import numpy as np
import scipy.linalg
from scipy.optimize import OptimizeResult
from scipy.optimize import minimize

from .hilbert import PureState
from .hilbert import apply_on_subsystem
from .hilbert import density_from_pure
from .hilbert import partial_trace
from .machines import StatePair
from .machines import pair_fidelity

logger = logging.getLogger(__name__)

GRADIENT_TOLERANCE = 1e-6
CONSTRAINT_TOLERANCE = 1e-8
NORM_FLOOR = 1e-12
# smallest BFGS gtol used by the gradient searches
GTOL_FLOOR = 1e-9


@dataclass(frozen=True)
class SearchConfig:
    """Budget and seed of a random-restart search.

    Attributes:
        restarts (int): Number of independent random starts.
        max_iterations (int): Iteration cap per start.
        tolerance (float): Convergence tolerance handed to the local optimizer;
            the BFGS searches never go below GTOL_FLOOR.
        seed (int): Base seed; restart k draws from default_rng([seed, k]).
    """

    restarts: int = 32
    max_iterations: int = 10_000
    tolerance: float = 1e-10
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError(f"restarts must be at least 1, got {self.restarts}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be at least 1, got {self.max_iterations}")
        if not self.tolerance > 0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")

    def rng_for(self, restart: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, restart])


class SearchError(RuntimeError):
    """Raised when no restart converged.

    Attributes:
        best_value (float): Best objective value seen anyway.
        best_certificate: Whatever produced best_value (outputs, unitary or filter).
    """

    def __init__(self, message: str, best_value: float, best_certificate=None):
        super().__init__(f"{message} (best value found: {best_value!r})")
        self.best_value = best_value
        self.best_certificate = best_certificate


@dataclass(frozen=True, eq=False)
class UnitarySearchResult:
    """Outcome of unitary_search.

    Attributes:
        fidelity (float): Best average fidelity, evaluated on the certificate.
        unitary (np.ndarray): The unitary attaining it.
        restart (int): Index of the winning restart.
        converged_restarts (int): How many restarts converged.
    """

    fidelity: float
    unitary: np.ndarray
    restart: int
    converged_restarts: int


@dataclass(frozen=True, eq=False)
class FilterSearchResult:
    """Outcome of filter_search.

    Attributes:
        probability (float): Best success probability among feasible filters.
        filter (np.ndarray): The 2x2 filter attaining it.
        restart (int): Index of the winning restart.
    """

    probability: float
    filter: np.ndarray
    restart: int


def _converged(result: OptimizeResult) -> bool:
    if result.success:
        return True
    jac = getattr(result, "jac", None)
    return jac is not None and float(np.linalg.norm(jac)) <= GRADIENT_TOLERANCE


def _run_restarts(
    objective: Callable[[np.ndarray], Union[float, Tuple[float, np.ndarray]]],
    start: Callable[[np.random.Generator], np.ndarray],
    config: SearchConfig,
    label: str,
    accept: Optional[Callable[[OptimizeResult], bool]] = None,
    **minimize_kwargs,
) -> Tuple[Optional[OptimizeResult], int, int, Optional[OptimizeResult]]:
    """Minimize from every restart; return (best converged, its index, count, best overall)."""
    accept = accept or _converged
    best: Optional[OptimizeResult] = None
    best_index = -1
    best_any: Optional[OptimizeResult] = None
    converged = 0
    for restart in range(config.restarts):
        x0 = start(config.rng_for(restart))
        result = minimize(objective, x0, **minimize_kwargs)
        ok = accept(result)
        logger.debug(
            f"{label} restart {restart}: value={-result.fun!r}, accepted={ok}, "
            f"message={result.message}"
        )
        if best_any is None or result.fun < best_any.fun:
            best_any = result
        if not ok:
            continue
        converged += 1
        if best is None or result.fun < best.fun:
            best, best_index = result, restart
    if converged < config.restarts:
        logger.warning(f"{label}: {config.restarts - converged} restarts did not converge")
    return best, best_index, converged, best_any


def _embed(vector: np.ndarray, dim: int) -> np.ndarray:
    if vector.size > dim:
        raise ValueError(f"Cannot embed a {vector.size}-dimensional vector in dimension {dim}")
    out = np.zeros(dim, dtype=complex)
    out[: vector.size] = vector
    return out


def _normalize(vector: np.ndarray) -> Tuple[np.ndarray, float, bool]:
    """Return (vector / n, n, projected) with n floored at NORM_FLOOR."""
    norm = float(np.linalg.norm(vector))
    if norm < NORM_FLOOR:
        return vector / NORM_FLOOR, NORM_FLOOR, False
    return vector / norm, norm, True


def _normalize_pullback(
    grad: np.ndarray, unit: np.ndarray, norm: float, projected: bool
) -> np.ndarray:
    if projected:
        grad = grad - np.vdot(grad, unit).real * unit
    return grad / norm


def _split_params(params: np.ndarray, dim: int) -> Tuple[np.ndarray, np.ndarray]:
    x = params[:dim] + 1j * params[dim : 2 * dim]
    y = params[2 * dim : 3 * dim] + 1j * params[3 * dim :]
    return x, y


def _outputs_from_params(params: np.ndarray, dim: int, forced_overlap: float):
    x, y = _split_params(params, dim)
    u, _, _ = _normalize(x)
    w, _, _ = _normalize(y - np.vdot(u, y) * u)
    return u, forced_overlap * u + np.sqrt(max(1.0 - forced_overlap**2, 0.0)) * w


def gram_fidelity_and_gradient(
    params: np.ndarray, targets: StatePair, forced_overlap: float
) -> Tuple[float, np.ndarray]:
    """Average fidelity of the parameterized output pair and its gradient.

    params holds 4·dim reals: real and imaginary parts of x, then of y. The
    outputs are o1 = x/|x| and o2 = c o1 + sqrt(1-c²) w, where w is y with its
    o1 component removed, normalized. Norms are floored at NORM_FLOOR so the
    objective stays finite when a start lands near zero.
    """
    params = np.asarray(params, dtype=float)
    dim = targets.psi.dim
    t1, t2 = targets.psi.amplitudes, targets.phi.amplitudes
    c = forced_overlap
    k = np.sqrt(max(1.0 - c**2, 0.0))

    x, y = _split_params(params, dim)
    u, x_norm, x_projected = _normalize(x)
    w, w_norm, w_projected = _normalize(y - np.vdot(u, y) * u)
    o2 = c * u + k * w
    value = (np.vdot(t1, u).real + np.vdot(t2, o2).real) / 2

    g_tilde = _normalize_pullback(k * t2 / 2, w, w_norm, w_projected)
    g_u = (t1 + c * t2) / 2 - np.vdot(g_tilde, u) * y - np.vdot(y, u) * g_tilde
    g_x = _normalize_pullback(g_u, u, x_norm, x_projected)
    g_y = g_tilde - np.vdot(u, g_tilde) * u
    grad = np.concatenate([g_x.real, g_x.imag, g_y.real, g_y.imag])
    return float(value), grad


def gram_constrained_max(
    targets: StatePair, forced_overlap: float, config: Optional[SearchConfig] = None
) -> Tuple[float, StatePair]:
    """Best average fidelity over all unit pairs with a fixed inner product.

    The search covers the whole space the targets live in, not only their
    plane. Output pairs are parameterized as o1 = u, o2 = c u + sqrt(1-c²) w
    with w a unit vector orthogonal to u.

    Args:
        targets: Ideal outputs.
        forced_overlap: Required <o1|o2>, in [0, 1].
        config: Search budget. Defaults to SearchConfig().

    Returns:
        Tuple[float, StatePair]: Best fidelity and the pair attaining it.

    Raises:
        ValueError: If forced_overlap is outside [0, 1].
        SearchError: If no restart converged.
    """
    if not 0.0 <= forced_overlap <= 1.0:
        raise ValueError(f"Forced overlap {forced_overlap!r} outside [0, 1]")
    config = config or SearchConfig()
    dim = targets.psi.dim

    def objective(params: np.ndarray) -> Tuple[float, np.ndarray]:
        value, grad = gram_fidelity_and_gradient(params, targets, forced_overlap)
        return -value, -grad

    best, index, converged, best_any = _run_restarts(
        objective,
        lambda rng: rng.normal(size=4 * dim),
        config,
        "gram_constrained_max",
        method="BFGS",
        jac=True,
        options={"maxiter": config.max_iterations, "gtol": max(config.tolerance, GTOL_FLOOR)},
    )
    if best is None:
        raise SearchError("gram_constrained_max: no restart converged", -best_any.fun)

    o1, o2 = _outputs_from_params(best.x, dim, forced_overlap)
    outputs = StatePair(
        PureState(o1, targets.psi.dims),
        PureState(o2, targets.psi.dims),
    )
    fidelity = pair_fidelity(targets, outputs)
    logger.info(
        f"gram_constrained_max: F={fidelity} (restart {index}, {converged} converged)"
    )
    return fidelity, outputs


def hermitian_from_params(params: np.ndarray, dim: int) -> np.ndarray:
    """Hermitian matrix from dim² reals: diagonal, then real and imaginary upper parts."""
    params = np.asarray(params, dtype=float)
    if params.size != dim * dim:
        raise ValueError(f"Need {dim * dim} parameters, got {params.size}")
    h = np.diag(params[:dim]).astype(complex)
    upper = np.triu_indices(dim, k=1)
    count = len(upper[0])
    off = params[dim : dim + count] + 1j * params[dim + count :]
    h[upper] = off
    h[(upper[1], upper[0])] = off.conj()
    return h


def unitary_from_params(params: np.ndarray, dim: int) -> np.ndarray:
    """U = exp(iH) for the Hermitian H encoded by params."""
    return scipy.linalg.expm(1j * hermitian_from_params(params, dim))


def unitary_fidelity_and_gradient(
    params: np.ndarray, dim: int, coupling: np.ndarray
) -> Tuple[float, np.ndarray]:
    """Re tr(U C)/2 for U = exp(iH(params)), and its gradient in params.

    The derivative of the exponential comes from the eigenbasis of H: with
    H = V diag(λ) V†, the directional derivative along dH is
    V (i Φ ∘ V† dH V) V† where Φ_jk = exp(i(λj+λk)/2) sinc((λj-λk)/2).
    """
    h = hermitian_from_params(params, dim)
    eigenvalues, vectors = np.linalg.eigh(h)
    phases = np.exp(1j * eigenvalues)
    unitary = (vectors * phases) @ vectors.conj().T
    value = float(np.real(np.trace(unitary @ coupling))) / 2

    half_sum = (eigenvalues[:, None] + eigenvalues[None, :]) / 2
    half_gap = (eigenvalues[:, None] - eigenvalues[None, :]) / 2
    phi = np.exp(1j * half_sum) * np.sinc(half_gap / np.pi)
    rotated = vectors.conj().T @ coupling @ vectors
    z = 0.5j * (vectors @ (phi * rotated) @ vectors.conj().T)

    rows, cols = np.triu_indices(dim, k=1)
    grad = np.concatenate(
        [
            np.real(np.diag(z)),
            np.real(z[rows, cols] + z[cols, rows]),
            np.imag(z[rows, cols] - z[cols, rows]),
        ]
    )
    return value, grad


def unitary_search(
    inputs: StatePair, targets: StatePair, dim: int, config: Optional[SearchConfig] = None
) -> UnitarySearchResult:
    """Best average fidelity (Re<t1|U i1> + Re<t2|U i2>)/2 over unitaries U.

    Inputs and targets are zero-padded into dimension dim, so dim larger than
    their own dimension explores ancilla-assisted machines.

    Raises:
        ValueError: If dim is smaller than the inputs or targets.
        SearchError: If no restart converged.
    """
    config = config or SearchConfig()
    i_mat = np.column_stack([_embed(inputs.psi.amplitudes, dim), _embed(inputs.phi.amplitudes, dim)])
    t_mat = np.column_stack(
        [_embed(targets.psi.amplitudes, dim), _embed(targets.phi.amplitudes, dim)]
    )
    coupling = i_mat @ t_mat.conj().T

    def fidelity_of(u: np.ndarray) -> float:
        return float(np.real(np.trace(t_mat.conj().T @ u @ i_mat))) / 2

    def objective(params: np.ndarray) -> Tuple[float, np.ndarray]:
        value, grad = unitary_fidelity_and_gradient(params, dim, coupling)
        return -value, -grad

    best, index, converged, best_any = _run_restarts(
        objective,
        lambda rng: rng.uniform(-np.pi, np.pi, size=dim * dim),
        config,
        "unitary_search",
        method="BFGS",
        jac=True,
        options={"maxiter": config.max_iterations, "gtol": max(config.tolerance, GTOL_FLOOR)},
    )
    if best is None:
        raise SearchError(
            "unitary_search: no restart converged",
            -best_any.fun,
            unitary_from_params(best_any.x, dim),
        )

    unitary = unitary_from_params(best.x, dim)
    fidelity = fidelity_of(unitary)
    logger.info(f"unitary_search dim={dim}: F={fidelity} (restart {index}, {converged} converged)")
    return UnitarySearchResult(
        fidelity=fidelity, unitary=unitary, restart=index, converged_restarts=converged
    )


def _maximally_entangled_pair() -> PureState:
    return PureState(np.array([1, 0, 0, 1]) / np.sqrt(2), (2, 2))


def filter_search(schmidt_a2: float, config: Optional[SearchConfig] = None) -> FilterSearchResult:
    """Best success probability of a one-sided filter reaching Schmidt weight a².

    A filter is any complex 2x2 matrix M with operator norm at most 1 applied to
    the A side of a maximally entangled pair. The success probability is the
    squared norm of the filtered vector; the constraint asks the larger
    Schmidt weight of the normalized result to equal schmidt_a2.

    Raises:
        ValueError: If schmidt_a2 is outside [1/2, 1).
        SearchError: If no restart found a feasible filter.
    """
    if not 0.5 <= schmidt_a2 < 1.0:
        raise ValueError(f"Schmidt weight {schmidt_a2!r} outside [1/2, 1)")
    config = config or SearchConfig()
    source = _maximally_entangled_pair()

    def filter_of(params: np.ndarray) -> np.ndarray:
        return (params[:4] + 1j * params[4:]).reshape(2, 2)

    def success(params: np.ndarray) -> float:
        return apply_on_subsystem(filter_of(params), source, [0]).norm ** 2

    def achieved_weight(params: np.ndarray) -> float:
        filtered = apply_on_subsystem(filter_of(params), source, [0])
        if filtered.norm < 1e-9:
            return 0.0
        reduced = partial_trace(density_from_pure([filtered.to_state()], [1.0]), [0])
        return float(reduced.eigenvalues()[-1])

    def norm_slack(params: np.ndarray) -> float:
        return 1.0 - float(np.linalg.norm(filter_of(params), 2)) ** 2

    constraints: List[dict] = [
        {"type": "ineq", "fun": norm_slack},
        {"type": "eq", "fun": lambda p: achieved_weight(p) - schmidt_a2},
    ]

    def feasible(result: OptimizeResult) -> bool:
        return (
            norm_slack(result.x) >= -CONSTRAINT_TOLERANCE
            and abs(achieved_weight(result.x) - schmidt_a2) <= CONSTRAINT_TOLERANCE
        )

    best, index, converged, best_any = _run_restarts(
        lambda p: -success(p),
        lambda rng: 0.5 * rng.normal(size=8),
        config,
        "filter_search",
        accept=feasible,
        method="SLSQP",
        constraints=constraints,
        options={"maxiter": config.max_iterations, "ftol": config.tolerance},
    )
    if best is None:
        raise SearchError(
            "filter_search: no feasible filter found", -best_any.fun, filter_of(best_any.x)
        )
    probability = success(best.x)
    logger.info(f"filter_search a2={schmidt_a2}: p={probability} (restart {index})")
    return FilterSearchResult(probability=probability, filter=filter_of(best.x), restart=index)
