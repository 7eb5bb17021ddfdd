"""Cloning and deleting machines for signalscope.

This module builds the coaxial cone geometry of two nonorthogonal states, the
optimal quantum state-dependent cloner and deleter, and the family of linear
but non-unitary ("super-quantum") machines that beat them. Machines are
explicit operators on the two-register B space.

Conventions: a symmetric pair at half-angle θ has overlap cos 2θ, with
θ ∈ [0, π/4]. A wider cone means a larger θ and a smaller overlap.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional
from typing import Tuple

import numpy as np
import scipy.linalg

from .hilbert import PureState
from .hilbert import basis_state
from .hilbert import inner
from .hilbert import tensor

logger = logging.getLogger(__name__)

OVERLAP_TOLERANCE = 1e-12
ANGLE_TOLERANCE = 1e-12
QUARTER_PI = np.pi / 4


class MachineKind(str, Enum):
    """Which evolution a machine attempts."""

    CLONE = "clone"
    DELETE = "delete"


class DegenerateGeometryError(ValueError):
    """Raised when the anchor overlap is 0 or 1 and no cone geometry exists."""


def _half_angle(overlap: float) -> float:
    return 0.5 * float(np.arccos(np.clip(overlap, -1.0, 1.0)))


@dataclass(frozen=True, eq=False)
class StatePair:
    """Two states of equal dims with a real nonnegative inner product.

    Attributes:
        psi (PureState): First state.
        phi (PureState): Second state.
    """

    psi: PureState
    phi: PureState

    def __post_init__(self):
        if self.psi.dims != self.phi.dims:
            raise ValueError(f"Pair dims differ: {self.psi.dims} vs {self.phi.dims}")
        value = inner(self.psi, self.phi)
        if abs(value.imag) > OVERLAP_TOLERANCE or value.real < -OVERLAP_TOLERANCE:
            raise ValueError(f"Pair inner product {value!r} is not real nonnegative")

    @property
    def overlap(self) -> float:
        return min(max(inner(self.psi, self.phi).real, 0.0), 1.0)

    @property
    def half_angle(self) -> float:
        return _half_angle(self.overlap)

    def as_matrix(self) -> np.ndarray:
        """Column matrix [psi phi]."""
        return np.column_stack([self.psi.amplitudes, self.phi.amplitudes])


def qubit_pair_from_overlap(s: float) -> StatePair:
    """Canonical qubit pair cos θ|0> ± sin θ|1> with inner product s = cos 2θ.

    Raises:
        ValueError: If s is outside [0, 1].
    """
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"Overlap {s!r} outside [0, 1]")
    theta = _half_angle(s)
    c, d = np.cos(theta), np.sin(theta)
    return StatePair(PureState([c, d], (2,)), PureState([c, -d], (2,)))


@dataclass(frozen=True, eq=False)
class ConeGeometry:
    """Coaxial cones of one cloning or deleting problem.

    Attributes:
        kind (MachineKind): Clone or delete.
        pair (StatePair): The anchor qubit pair |ψ>, |φ>.
        blank (PureState): The blank register state |0>.
        inputs (StatePair): States the machine acts on.
        targets (StatePair): Ideal outputs.
        e_plus (PureState): Bisector of the targets.
        e_minus (PureState): Completes the target plane.
        theta_in (float): Half-angle of the input pair.
        theta_q (float): Half-angle forced on outputs by unitarity.
        theta_target (float): Half-angle of the target pair.
    """

    kind: MachineKind
    pair: StatePair
    blank: PureState
    inputs: StatePair
    targets: StatePair
    e_plus: PureState
    e_minus: PureState
    theta_in: float
    theta_q: float
    theta_target: float

    @property
    def s(self) -> float:
        return self.pair.overlap

    @property
    def dims(self) -> Tuple[int, ...]:
        return self.targets.psi.dims


def anchor_states(
    pair: StatePair, kind: MachineKind, blank: Optional[PureState] = None
) -> Tuple[StatePair, StatePair]:
    """Inputs and ideal targets of a machine on the two-register B space.

    Cloning takes |x>|0> to |x>|x>; deleting takes |x>|x> to |x>|0>.

    Returns:
        Tuple[StatePair, StatePair]: (inputs, targets).
    """
    kind = MachineKind(kind)
    blank = blank if blank is not None else basis_state(pair.psi.dim, 0)
    if blank.dims != pair.psi.dims:
        raise ValueError(f"Blank dims {blank.dims} differ from pair dims {pair.psi.dims}")
    with_blank = StatePair(tensor(pair.psi, blank), tensor(pair.phi, blank))
    doubled = StatePair(tensor(pair.psi, pair.psi), tensor(pair.phi, pair.phi))
    if kind is MachineKind.CLONE:
        return with_blank, doubled
    return doubled, with_blank


def cone_geometry(
    pair: StatePair, kind: MachineKind, blank: Optional[PureState] = None
) -> ConeGeometry:
    """Build the cone geometry for cloning or deleting a qubit pair.

    Args:
        pair: Anchor pair with overlap s strictly between 0 and 1.
        kind: Clone ( |x>|0> -> |x>|x> ) or delete ( |x>|x> -> |x>|0> ).
        blank: Blank register state. Defaults to |0>.

    Returns:
        ConeGeometry: Inputs, targets, bisector basis and half-angles.

    Raises:
        DegenerateGeometryError: If s is 0 or 1.
    """
    kind = MachineKind(kind)
    blank = blank if blank is not None else basis_state(pair.psi.dim, 0)
    s = pair.overlap
    if s <= OVERLAP_TOLERANCE or s >= 1.0 - OVERLAP_TOLERANCE:
        raise DegenerateGeometryError(f"No cone geometry for overlap s = {s!r}")

    inputs, targets = anchor_states(pair, kind, blank)

    t1, t2 = targets.psi.amplitudes, targets.phi.amplitudes
    e_plus = PureState.from_vector(t1 + t2, targets.psi.dims, normalize=True)
    e_minus = PureState.from_vector(t1 - t2, targets.psi.dims, normalize=True)

    theta_in = inputs.half_angle
    geometry = ConeGeometry(
        kind=kind,
        pair=pair,
        blank=blank,
        inputs=inputs,
        targets=targets,
        e_plus=e_plus,
        e_minus=e_minus,
        theta_in=theta_in,
        # unitarity preserves the input overlap
        theta_q=theta_in,
        theta_target=targets.half_angle,
    )
    logger.debug(
        f"{kind.value} geometry s={s}: theta_q={geometry.theta_q}, "
        f"theta_target={geometry.theta_target}"
    )
    return geometry


def symmetric_pair_at(geom: ConeGeometry, theta: float) -> StatePair:
    """Pair cos θ e+ ± sin θ e- on the cone of half-angle θ.

    Raises:
        ValueError: If θ is outside [0, π/4].
    """
    if theta < -ANGLE_TOLERANCE or theta > QUARTER_PI + ANGLE_TOLERANCE:
        raise ValueError(f"Half-angle {theta!r} outside [0, pi/4]")
    theta = min(max(theta, 0.0), QUARTER_PI)
    c, d = np.cos(theta), np.sin(theta)
    plus, minus = geom.e_plus.amplitudes, geom.e_minus.amplitudes
    return StatePair(
        PureState(c * plus + d * minus, geom.dims),
        PureState(c * plus - d * minus, geom.dims),
    )


def pair_fidelity(targets: StatePair, outputs: StatePair) -> float:
    """Average fidelity (Re<t1|o1> + Re<t2|o2>)/2."""
    return (inner(targets.psi, outputs.psi).real + inner(targets.phi, outputs.phi).real) / 2


def optimal_fidelity(geom: ConeGeometry) -> Tuple[float, StatePair]:
    """Best quantum fidelity and the outputs attaining it.

    The optimum over output pairs with the unitarity-forced overlap sits on
    the cone of half-angle theta_q, coaxial with the targets.

    Returns:
        Tuple[float, StatePair]: cos(theta_target - theta_q) and the optimal outputs.
    """
    return float(np.cos(geom.theta_target - geom.theta_q)), symmetric_pair_at(geom, geom.theta_q)


def optimal_fidelity_for_overlap(s: float, kind: MachineKind) -> float:
    """Cone-formula optimum for a canonical pair, 1 at the degenerate overlaps."""
    pair = qubit_pair_from_overlap(s)
    try:
        return optimal_fidelity(cone_geometry(pair, kind))[0]
    except DegenerateGeometryError:
        return 1.0


def analytic_constrained_optimum(target_overlap: float, forced_overlap: float) -> float:
    """Closed-form maximum of the average fidelity at a fixed output overlap.

    Over all output pairs with inner product c against targets with inner
    product g the maximum is sqrt((1+c)(1+g))/2 + sqrt((1-c)(1-g))/2.
    """
    c, g = forced_overlap, target_overlap
    return float(np.sqrt((1 + c) * (1 + g)) / 2 + np.sqrt(max((1 - c) * (1 - g), 0.0)) / 2)


def admissible_theta_interval(geom: ConeGeometry) -> Tuple[float, float]:
    """Closed θ′ interval between the quantum cone and the target cone, ascending."""
    return tuple(sorted((geom.theta_q, geom.theta_target)))


def max_fidelity_excess(geom: ConeGeometry) -> float:
    """1 - F_optimal: the excess that selects the exact machine."""
    return 1.0 - optimal_fidelity(geom)[0]


@dataclass(frozen=True, eq=False)
class LinearMachine:
    """Linear operator on the B space defined by two anchor states.

    Attributes:
        operator (np.ndarray): Matrix on the B space; zero off the anchor span.
        kind (MachineKind): Clone or delete.
        anchor_inputs (StatePair): States the machine is defined on.
        anchor_outputs (StatePair): Their images.
        theta_prime (float): Half-angle of the output cone.
        fidelity (float): Average fidelity of the outputs against the targets.
    """

    operator: np.ndarray
    kind: MachineKind
    anchor_inputs: StatePair
    anchor_outputs: StatePair
    theta_prime: float
    fidelity: float

    @property
    def output_overlap(self) -> float:
        return self.anchor_outputs.overlap


def super_machine(geom: ConeGeometry, theta_prime: float) -> LinearMachine:
    """Linear machine whose outputs sit on the cone of half-angle theta_prime.

    The operator sends input k to output k and annihilates the orthogonal
    complement of the input span. At theta_prime = theta_q the machine is the
    optimal quantum one on its anchors; anything strictly closer to
    theta_target beats every quantum machine.

    Raises:
        ValueError: If theta_prime lies outside the admissible interval.
    """
    low, high = admissible_theta_interval(geom)
    if theta_prime < low - ANGLE_TOLERANCE or theta_prime > high + ANGLE_TOLERANCE:
        raise ValueError(
            f"theta_prime {theta_prime!r} outside admissible interval [{low}, {high}]"
        )
    theta_prime = min(max(theta_prime, low), high)

    outputs = symmetric_pair_at(geom, theta_prime)
    inputs = geom.inputs.as_matrix()
    operator = outputs.as_matrix() @ scipy.linalg.pinv(inputs)
    fidelity = pair_fidelity(geom.targets, outputs)
    logger.debug(f"{geom.kind.value} machine theta'={theta_prime}: fidelity={fidelity}")
    return LinearMachine(
        operator=operator,
        kind=geom.kind,
        anchor_inputs=geom.inputs,
        anchor_outputs=outputs,
        theta_prime=theta_prime,
        fidelity=fidelity,
    )


def machine_by_fidelity_excess(geom: ConeGeometry, epsilon: float) -> LinearMachine:
    """Machine whose fidelity exceeds the quantum optimum by epsilon.

    Solves cos(theta_target - θ′) = F_optimal + epsilon on the admissible side.

    Raises:
        ValueError: If epsilon is negative or the requested fidelity exceeds 1.
    """
    if epsilon < 0:
        raise ValueError(f"Fidelity excess must be nonnegative, got {epsilon!r}")
    f_opt = optimal_fidelity(geom)[0]
    requested = f_opt + epsilon
    if requested > 1.0 + OVERLAP_TOLERANCE:
        raise ValueError(
            f"Requested fidelity {requested!r} exceeds 1 (maximum excess {1.0 - f_opt!r})"
        )
    distance = float(np.arccos(min(requested, 1.0)))
    if geom.kind is MachineKind.CLONE:
        theta_prime = geom.theta_target - distance
    else:
        theta_prime = geom.theta_target + distance
    if epsilon == 0:
        theta_prime = geom.theta_q
    return super_machine(geom, theta_prime)
