"""Signaling detection protocol for signalscope.

A probe state shares an A qubit with a two-register B part whose branches are
the anchor states of a cloning or deleting machine. The machine acts on B
only; by linearity the A-part reduced state then depends on the overlap of the
machine's outputs. Any machine that beats the quantum optimum changes that
overlap, and with it the A-part entropy: a signal sent to A by acting on B.

This module builds probes, runs the protocol, sweeps parameter grids, inverts
entropy readings into bounds on machine fidelity and does the arithmetic of
preparing probes by local filtering.
"""

import logging
from dataclasses import asdict
from dataclasses import dataclass
from typing import Any
from typing import Dict
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple

import numpy as np
from scipy.optimize import bisect

from .hilbert import PureState
from .hilbert import apply_on_subsystem
from .hilbert import basis_state
from .hilbert import binary_entropy
from .hilbert import density_from_pure
from .hilbert import inner
from .hilbert import partial_trace
from .hilbert import von_neumann_entropy
from .machines import DegenerateGeometryError
from .machines import LinearMachine
from .machines import MachineKind
from .machines import StatePair
from .machines import admissible_theta_interval
from .machines import anchor_states
from .machines import cone_geometry
from .machines import machine_by_fidelity_excess
from .machines import max_fidelity_excess
from .machines import optimal_fidelity
from .machines import qubit_pair_from_overlap

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 1e-9
ANCHOR_TOLERANCE = 1e-10
NORM_TOLERANCE = 1e-8
PURITY_TOLERANCE = 1e-10
BISECTION_TOLERANCE = 1e-10
FEASIBILITY_TOLERANCE = 1e-12
ENTROPY_TOLERANCE = 1e-12


class ProtocolError(ValueError):
    """Raised when a machine and a probe do not fit together."""


def entropy_for_overlap(overlap: float) -> float:
    """A-part entropy H((1+x)/2) of a probe whose B branches have overlap x."""
    return binary_entropy((1.0 + overlap) / 2.0)


@dataclass(frozen=True, eq=False)
class ProbeState:
    """Entangled A|B probe (|0>_A|b1>_B + |1>_A|b2>_B)/sqrt(2).

    Attributes:
        state (PureState): The probe, dims (2, d_B).
        kind (MachineKind): Which machine the probe is built to test.
        anchor_pair (StatePair): The qubit pair |ψ>, |φ>.
        blank (PureState): Blank register state.
        branches (StatePair): The B states |b1>, |b2> correlated with |0>_A, |1>_A.
    """

    state: PureState
    kind: MachineKind
    anchor_pair: StatePair
    blank: PureState
    branches: StatePair


def build_probe(
    pair: StatePair, kind: MachineKind, blank: Optional[PureState] = None
) -> ProbeState:
    """Build the probe whose B branches are the machine's anchor inputs.

    Args:
        pair: Anchor qubit pair.
        kind: Clone probe uses |ψ>|0>, |φ>|0>; delete probe uses |ψ>|ψ>, |φ>|φ>.
        blank: Blank register state. Defaults to |0>.

    Raises:
        ValueError: If the blank is not a unit vector of the pair's dimension.
    """
    kind = MachineKind(kind)
    blank = blank if blank is not None else basis_state(pair.psi.dim, 0)
    if abs(np.linalg.norm(blank.amplitudes) - 1.0) > 1e-12:
        raise ValueError("Blank state must be a unit vector")
    if blank.dims != pair.psi.dims:
        raise ValueError(f"Blank dims {blank.dims} differ from pair dims {pair.psi.dims}")

    branches, _ = anchor_states(pair, kind, blank)
    d_b = branches.psi.dim
    amplitudes = (
        np.kron(basis_state(2, 0).amplitudes, branches.psi.amplitudes)
        + np.kron(basis_state(2, 1).amplitudes, branches.phi.amplitudes)
    ) / np.sqrt(2)
    state = PureState(amplitudes, (2, d_b))
    logger.info(f"Built {kind.value} probe with anchor overlap {pair.overlap}")
    return ProbeState(state=state, kind=kind, anchor_pair=pair, blank=blank, branches=branches)


@dataclass(frozen=True)
class SignalingReport:
    """Outcome of one protocol run. Entropies are in bits.

    Attributes:
        kind (str): clone or delete.
        s (float): Anchor overlap.
        theta_prime (float): Output half-angle of the machine.
        entropy_before (float): A-part entropy of the probe.
        entropy_after (float): A-part entropy after the machine acted on B.
        delta (float): entropy_after - entropy_before.
        threshold (float): Detection threshold on |delta|.
        signaling (bool): Whether |delta| exceeds the threshold.
        machine_fidelity (float): Fidelity of the machine applied.
        optimal_fidelity (float): Best quantum fidelity for the same anchors.
        overlap_before (float): Overlap of the B branches before.
        overlap_after (float): Overlap of the B branches after.
    """

    kind: str
    s: float
    theta_prime: float
    entropy_before: float
    entropy_after: float
    delta: float
    threshold: float
    signaling: bool
    machine_fidelity: float
    optimal_fidelity: float
    overlap_before: float
    overlap_after: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _a_and_b_entropies(state: PureState) -> Tuple[float, float]:
    rho = density_from_pure([state], [1.0])
    entropy_a = von_neumann_entropy(partial_trace(rho, [0]))
    entropy_b = von_neumann_entropy(partial_trace(rho, [1]))
    if abs(entropy_a - entropy_b) > PURITY_TOLERANCE:
        raise ProtocolError(
            f"A-part entropy {entropy_a!r} differs from B-part entropy {entropy_b!r}"
        )
    return entropy_a, entropy_b


def _matches(left: PureState, right: PureState) -> bool:
    return left.dim == right.dim and np.allclose(
        left.amplitudes, right.amplitudes, rtol=0.0, atol=ANCHOR_TOLERANCE
    )


def run_protocol(
    probe: ProbeState, machine: LinearMachine, threshold: float = DEFAULT_THRESHOLD
) -> SignalingReport:
    """Apply a machine to the B part of a probe and measure the A-part entropy change.

    Args:
        probe: Probe whose branches are the machine's anchor inputs.
        machine: Linear machine acting on B.
        threshold: Signaling is reported when |delta| exceeds this many bits.

    Returns:
        SignalingReport: Entropies, delta, verdict and fidelity bookkeeping.

    Raises:
        ProtocolError: If anchors do not match the probe, the evolved state is
            not normalized, or A and B entropies disagree.
    """
    if machine.kind is not probe.kind:
        raise ProtocolError(f"{machine.kind.value} machine cannot run on a {probe.kind.value} probe")
    if not (
        _matches(machine.anchor_inputs.psi, probe.branches.psi)
        and _matches(machine.anchor_inputs.phi, probe.branches.phi)
    ):
        raise ProtocolError("Machine anchor inputs differ from the probe's B branches")

    evolved = apply_on_subsystem(machine.operator, probe.state, [1])
    if abs(evolved.norm - 1.0) > NORM_TOLERANCE:
        raise ProtocolError(f"Evolved probe has norm {evolved.norm!r}; machine and probe disagree")
    evolved_state = evolved.to_state()

    entropy_before, _ = _a_and_b_entropies(probe.state)
    entropy_after, _ = _a_and_b_entropies(evolved_state)
    delta = entropy_after - entropy_before

    geometry = cone_geometry(probe.anchor_pair, probe.kind, probe.blank)
    report = SignalingReport(
        kind=probe.kind.value,
        s=probe.anchor_pair.overlap,
        theta_prime=machine.theta_prime,
        entropy_before=entropy_before,
        entropy_after=entropy_after,
        delta=delta,
        threshold=threshold,
        signaling=abs(delta) > threshold,
        machine_fidelity=machine.fidelity,
        optimal_fidelity=optimal_fidelity(geometry)[0],
        overlap_before=abs(inner(probe.branches.psi, probe.branches.phi)),
        overlap_after=abs(inner(machine.anchor_outputs.psi, machine.anchor_outputs.phi)),
    )
    logger.info(
        f"{report.kind} protocol s={report.s}: delta={delta} bits, signaling={report.signaling}"
    )
    return report


def exact_machine_delta(pair: StatePair, kind: MachineKind) -> float:
    """Entropy change caused by the exact cloner or deleter on its probe."""
    geometry = cone_geometry(pair, kind)
    return entropy_for_overlap(geometry.targets.overlap) - entropy_for_overlap(
        geometry.inputs.overlap
    )


@dataclass(frozen=True)
class SweepRecord:
    """One (s, epsilon) cell of a sweep; numeric fields are None when infeasible."""

    kind: str
    s: float
    epsilon: float
    theta_prime: Optional[float]
    fidelity: Optional[float]
    optimal_fidelity: Optional[float]
    entropy_before: Optional[float]
    entropy_after: Optional[float]
    delta: Optional[float]
    signaling: Optional[bool]
    feasible: bool

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _infeasible(kind: MachineKind, s: float, epsilon: float, f_opt: Optional[float]) -> SweepRecord:
    return SweepRecord(
        kind=kind.value,
        s=s,
        epsilon=epsilon,
        theta_prime=None,
        fidelity=None,
        optimal_fidelity=f_opt,
        entropy_before=None,
        entropy_after=None,
        delta=None,
        signaling=None,
        feasible=False,
    )


def sweep(
    kind: MachineKind,
    s_grid: Sequence[float],
    epsilon_grid: Sequence[float],
    threshold: float = DEFAULT_THRESHOLD,
) -> List[SweepRecord]:
    """Run the protocol over a grid of overlaps and fidelity excesses.

    Records follow the grid order, s outermost. Cells whose epsilon exceeds
    1 - F_optimal, and cells at the degenerate overlaps 0 and 1, are recorded
    as infeasible.
    """
    kind = MachineKind(kind)
    records: List[SweepRecord] = []
    for s in s_grid:
        pair = qubit_pair_from_overlap(s)
        try:
            geometry = cone_geometry(pair, kind)
        except DegenerateGeometryError:
            logger.info(f"Sweep: s={s} is degenerate, cells marked infeasible")
            records.extend(_infeasible(kind, s, eps, 1.0) for eps in epsilon_grid)
            continue
        probe = build_probe(pair, kind)
        f_opt = optimal_fidelity(geometry)[0]
        limit = max_fidelity_excess(geometry)
        for epsilon in epsilon_grid:
            if epsilon < 0 or epsilon > limit + FEASIBILITY_TOLERANCE:
                records.append(_infeasible(kind, s, epsilon, f_opt))
                continue
            machine = machine_by_fidelity_excess(geometry, min(epsilon, limit))
            report = run_protocol(probe, machine, threshold)
            records.append(
                SweepRecord(
                    kind=kind.value,
                    s=s,
                    epsilon=epsilon,
                    theta_prime=machine.theta_prime,
                    fidelity=machine.fidelity,
                    optimal_fidelity=f_opt,
                    entropy_before=report.entropy_before,
                    entropy_after=report.entropy_after,
                    delta=report.delta,
                    signaling=report.signaling,
                    feasible=True,
                )
            )
    return records


@dataclass(frozen=True)
class PowerBound:
    """Machine fidelities consistent with an A-part entropy reading.

    Attributes:
        kind (str): clone or delete.
        s (float): Anchor overlap.
        measured_entropy (float): Reading, in bits.
        uncertainty (float): Half-width of the reading, in bits.
        fidelity_interval (Tuple[float, float]): Consistent machine fidelities.
        theta_interval (Tuple[float, float]): Consistent output half-angles.
        out_of_model (bool): No admissible machine explains the reading.
    """

    kind: str
    s: float
    measured_entropy: float
    uncertainty: float
    fidelity_interval: Tuple[float, float]
    theta_interval: Tuple[float, float]
    out_of_model: bool

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["fidelity_interval"] = list(self.fidelity_interval)
        data["theta_interval"] = list(self.theta_interval)
        return data


def bound_from_entropy(
    pair: StatePair, kind: MachineKind, measured_entropy: float, uncertainty: float = 0.0
) -> PowerBound:
    """Invert an A-part entropy reading into the machines that could produce it.

    The A-part entropy H((1+cos 2θ′)/2) is strictly increasing in θ′ on the
    admissible interval, so each end of measured ± uncertainty is located by
    bisection. Readings entirely outside the admissible entropy range give the
    nearest endpoint and set out_of_model.

    Raises:
        ValueError: If uncertainty is negative.
    """
    if uncertainty < 0:
        raise ValueError(f"Uncertainty must be nonnegative, got {uncertainty!r}")
    kind = MachineKind(kind)
    s = pair.overlap

    try:
        geometry = cone_geometry(pair, kind)
    except DegenerateGeometryError:
        forced = s if kind is MachineKind.CLONE else s * s
        theta = 0.5 * float(np.arccos(forced))
        expected = entropy_for_overlap(forced)
        out = abs(measured_entropy - expected) > uncertainty
        return PowerBound(kind.value, s, measured_entropy, uncertainty, (1.0, 1.0), (theta, theta), out)

    low, high = admissible_theta_interval(geometry)

    def entropy_at(theta: float) -> float:
        return entropy_for_overlap(float(np.cos(2 * theta)))

    def fidelity_at(theta: float) -> float:
        return float(np.cos(geometry.theta_target - theta))

    entropy_low, entropy_high = entropy_at(low), entropy_at(high)

    def invert(value: float) -> float:
        if value <= entropy_low:
            return low
        if value >= entropy_high:
            return high
        return bisect(lambda t: entropy_at(t) - value, low, high, xtol=BISECTION_TOLERANCE)

    reading_low = measured_entropy - uncertainty
    reading_high = measured_entropy + uncertainty
    out_of_model = (
        reading_high < entropy_low - ENTROPY_TOLERANCE
        or reading_low > entropy_high + ENTROPY_TOLERANCE
    )
    if out_of_model:
        logger.warning(
            f"Entropy reading {measured_entropy} ± {uncertainty} outside the admissible "
            f"range [{entropy_low}, {entropy_high}]"
        )

    thetas = (invert(reading_low), invert(reading_high))
    fidelities = sorted(fidelity_at(t) for t in thetas)
    return PowerBound(
        kind=kind.value,
        s=s,
        measured_entropy=measured_entropy,
        uncertainty=uncertainty,
        fidelity_interval=(fidelities[0], fidelities[1]),
        theta_interval=(min(thetas), max(thetas)),
        out_of_model=out_of_model,
    )


@dataclass(frozen=True)
class ExperimentPlan:
    """Preparation numbers for a probe made by filtering a maximally entangled pair.

    Attributes:
        kind (str): clone or delete.
        s (float): Anchor overlap.
        schmidt_a2 (float): Larger squared Schmidt coefficient of the probe.
        target_entropy (float): A-part entropy H(a²), in bits.
        filter_success_probability (float): Success probability of the optimal one-sided filter.
    """

    kind: str
    s: float
    schmidt_a2: float
    target_entropy: float
    filter_success_probability: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def optimal_filter(schmidt_a2: float) -> np.ndarray:
    """One-sided filter diag(1, b/a) taking a maximally entangled pair to Schmidt weights (a², b²)."""
    a = np.sqrt(schmidt_a2)
    b = np.sqrt(max(1.0 - schmidt_a2, 0.0))
    return np.diag([1.0, b / a]).astype(complex)


def plan_experiment(pair: StatePair, kind: MachineKind) -> ExperimentPlan:
    """Schmidt weight, target entropy and filtering success probability of a probe."""
    kind = MachineKind(kind)
    s = pair.overlap
    branch_overlap = s if kind is MachineKind.CLONE else s * s
    schmidt_a2 = (1.0 + branch_overlap) / 2.0

    source = PureState(np.array([1, 0, 0, 1]) / np.sqrt(2), (2, 2))
    filtered = apply_on_subsystem(optimal_filter(schmidt_a2), source, [0])
    plan = ExperimentPlan(
        kind=kind.value,
        s=s,
        schmidt_a2=schmidt_a2,
        target_entropy=binary_entropy(schmidt_a2),
        filter_success_probability=filtered.norm**2,
    )
    logger.info(f"Planned {kind.value} probe for s={s}: a^2={schmidt_a2}")
    return plan
