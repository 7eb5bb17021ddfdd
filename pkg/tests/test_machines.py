import numpy as np
import pytest

from signalscope.hilbert import basis_state
from signalscope.hilbert import inner
from signalscope.machines import DegenerateGeometryError
from signalscope.machines import MachineKind
from signalscope.machines import admissible_theta_interval
from signalscope.machines import analytic_constrained_optimum
from signalscope.machines import anchor_states
from signalscope.machines import cone_geometry
from signalscope.machines import machine_by_fidelity_excess
from signalscope.machines import max_fidelity_excess
from signalscope.machines import optimal_fidelity
from signalscope.machines import optimal_fidelity_for_overlap
from signalscope.machines import pair_fidelity
from signalscope.machines import qubit_pair_from_overlap
from signalscope.machines import super_machine
from signalscope.machines import symmetric_pair_at

OVERLAPS = np.round(np.arange(0.05, 0.951, 0.05), 12)


@pytest.mark.parametrize("s", [0.0, 0.3, 0.6, 1.0])
def test_qubit_pair_has_requested_overlap(s):
    pair = qubit_pair_from_overlap(s)
    assert inner(pair.psi, pair.phi).real == pytest.approx(s, abs=1e-12)
    assert pair.psi.dims == (2,)


def test_qubit_pair_rejects_out_of_range():
    with pytest.raises(ValueError):
        qubit_pair_from_overlap(1.2)
    with pytest.raises(ValueError):
        qubit_pair_from_overlap(-0.1)


def test_clone_and_delete_anchors_swap_roles(half_pair):
    clone_in, clone_out = anchor_states(half_pair, MachineKind.CLONE)
    delete_in, delete_out = anchor_states(half_pair, MachineKind.DELETE)
    assert clone_in.overlap == pytest.approx(0.5)
    assert clone_out.overlap == pytest.approx(0.25)
    assert np.allclose(delete_in.psi.amplitudes, clone_out.psi.amplitudes)
    assert np.allclose(delete_out.phi.amplitudes, clone_in.phi.amplitudes)


def test_anchor_states_reject_blank_of_wrong_size(half_pair):
    with pytest.raises(ValueError, match="Blank dims"):
        anchor_states(half_pair, MachineKind.CLONE, basis_state(3, 0))


def test_clone_geometry_angles():
    geometry = cone_geometry(qubit_pair_from_overlap(0.6), MachineKind.CLONE)
    assert np.cos(2 * geometry.theta_q) == pytest.approx(0.6, abs=1e-12)
    assert np.cos(2 * geometry.theta_target) == pytest.approx(0.36, abs=1e-12)
    assert geometry.theta_q < geometry.theta_target
    assert geometry.dims == (2, 2)


def test_delete_geometry_angles():
    geometry = cone_geometry(qubit_pair_from_overlap(0.6), MachineKind.DELETE)
    assert np.cos(2 * geometry.theta_q) == pytest.approx(0.36, abs=1e-12)
    assert np.cos(2 * geometry.theta_target) == pytest.approx(0.6, abs=1e-12)
    assert geometry.theta_target < geometry.theta_q


@pytest.mark.parametrize("s", [0.0, 1.0])
@pytest.mark.parametrize("kind", list(MachineKind))
def test_degenerate_overlaps_have_no_geometry(s, kind):
    with pytest.raises(DegenerateGeometryError):
        cone_geometry(qubit_pair_from_overlap(s), kind)


def test_bisector_basis_is_orthonormal_and_spans_targets(clone_geometry):
    e_plus, e_minus = clone_geometry.e_plus, clone_geometry.e_minus
    assert abs(inner(e_plus, e_minus)) < 1e-12
    rebuilt = symmetric_pair_at(clone_geometry, clone_geometry.theta_target)
    assert np.allclose(rebuilt.psi.amplitudes, clone_geometry.targets.psi.amplitudes, atol=1e-12)
    assert np.allclose(rebuilt.phi.amplitudes, clone_geometry.targets.phi.amplitudes, atol=1e-12)


def test_symmetric_pair_limits(clone_geometry):
    assert symmetric_pair_at(clone_geometry, 0.0).overlap == pytest.approx(1.0)
    assert symmetric_pair_at(clone_geometry, np.pi / 4).overlap == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        symmetric_pair_at(clone_geometry, 1.0)


def test_optimal_clone_fidelity_at_half_overlap(clone_geometry):
    fidelity, outputs = optimal_fidelity(clone_geometry)
    assert fidelity == pytest.approx(0.99084, abs=1e-5)
    assert outputs.overlap == pytest.approx(0.5, abs=1e-12)
    assert pair_fidelity(clone_geometry.targets, outputs) == pytest.approx(fidelity, abs=1e-12)


def test_optimal_delete_fidelity_equals_clone(clone_geometry, delete_geometry):
    assert optimal_fidelity(delete_geometry)[0] == pytest.approx(
        optimal_fidelity(clone_geometry)[0], abs=1e-12
    )


@pytest.mark.parametrize("s", [1e-6, 1 - 1e-8])
def test_optimal_fidelity_tends_to_one_at_the_ends(s):
    assert optimal_fidelity_for_overlap(s, MachineKind.CLONE) == pytest.approx(1.0, abs=1e-4)


def test_optimal_fidelity_is_one_at_degenerate_overlaps():
    assert optimal_fidelity_for_overlap(0.0, MachineKind.CLONE) == 1.0
    assert optimal_fidelity_for_overlap(1.0, MachineKind.DELETE) == 1.0


@pytest.mark.parametrize("s", OVERLAPS)
def test_cone_formula_matches_closed_form(s):
    f_clone = optimal_fidelity_for_overlap(s, MachineKind.CLONE)
    assert f_clone == pytest.approx(analytic_constrained_optimum(s * s, s), abs=1e-12)
    f_delete = optimal_fidelity_for_overlap(s, MachineKind.DELETE)
    assert f_delete == pytest.approx(analytic_constrained_optimum(s, s * s), abs=1e-12)
    assert f_clone < 1.0


def test_quantum_machine_preserves_overlap(clone_geometry):
    machine = super_machine(clone_geometry, clone_geometry.theta_q)
    assert machine.output_overlap == pytest.approx(0.5, abs=1e-12)
    assert machine.fidelity == pytest.approx(optimal_fidelity(clone_geometry)[0], abs=1e-12)


def test_exact_cloner(clone_geometry):
    machine = super_machine(clone_geometry, clone_geometry.theta_target)
    assert machine.fidelity == pytest.approx(1.0, abs=1e-12)
    assert machine.output_overlap == pytest.approx(0.25, abs=1e-12)


@pytest.mark.parametrize("kind", list(MachineKind))
def test_machine_maps_anchors_and_annihilates_complement(half_pair, kind):
    geometry = cone_geometry(half_pair, kind)
    low, high = admissible_theta_interval(geometry)
    machine = super_machine(geometry, (low + high) / 2)

    for source, image in [
        (geometry.inputs.psi, machine.anchor_outputs.psi),
        (geometry.inputs.phi, machine.anchor_outputs.phi),
    ]:
        assert np.allclose(machine.operator @ source.amplitudes, image.amplitudes, atol=1e-12)

    span, _ = np.linalg.qr(geometry.inputs.as_matrix())
    complement = np.eye(4) - span @ span.conj().T
    assert np.allclose(machine.operator @ complement, 0.0, atol=1e-12)


def test_machine_is_linear(clone_geometry, rng):
    machine = super_machine(clone_geometry, clone_geometry.theta_target)
    a, b = rng.normal(size=2) + 1j * rng.normal(size=2)
    psi = clone_geometry.inputs.psi.amplitudes
    phi = clone_geometry.inputs.phi.amplitudes
    combined = machine.operator @ (a * psi + b * phi)
    expected = a * machine.anchor_outputs.psi.amplitudes + b * machine.anchor_outputs.phi.amplitudes
    assert np.allclose(combined, expected, atol=1e-12)


def test_machine_outside_interval_rejected(clone_geometry):
    with pytest.raises(ValueError, match="admissible"):
        super_machine(clone_geometry, clone_geometry.theta_target + 0.01)
    with pytest.raises(ValueError, match="admissible"):
        super_machine(clone_geometry, clone_geometry.theta_q - 0.01)


@pytest.mark.parametrize("kind", list(MachineKind))
def test_fidelity_and_overlap_move_monotonically(half_pair, kind):
    geometry = cone_geometry(half_pair, kind)
    f_opt = optimal_fidelity(geometry)[0]
    thetas = np.linspace(geometry.theta_q, geometry.theta_target, 12)
    machines = [super_machine(geometry, t) for t in thetas]
    fidelities = [m.fidelity for m in machines]
    overlaps = [m.output_overlap for m in machines]

    assert np.all(np.diff(fidelities) > 0)
    assert all(f > f_opt for f in fidelities[1:])
    if kind is MachineKind.CLONE:
        assert np.all(np.diff(overlaps) < 0)
    else:
        assert np.all(np.diff(overlaps) > 0)


@pytest.mark.parametrize("s", OVERLAPS)
def test_super_cloner_shrinks_overlap(s):
    geometry = cone_geometry(qubit_pair_from_overlap(s), MachineKind.CLONE)
    machine = machine_by_fidelity_excess(geometry, max_fidelity_excess(geometry) / 2)
    assert machine.output_overlap < s


def test_machine_by_fidelity_excess(clone_geometry):
    f_opt = optimal_fidelity(clone_geometry)[0]

    quantum = machine_by_fidelity_excess(clone_geometry, 0.0)
    assert quantum.theta_prime == clone_geometry.theta_q
    assert quantum.fidelity == pytest.approx(f_opt, abs=1e-12)

    better = machine_by_fidelity_excess(clone_geometry, 0.005)
    assert better.fidelity == pytest.approx(f_opt + 0.005, abs=1e-9)
    assert better.fidelity == pytest.approx(0.99584, abs=1e-5)
    assert better.output_overlap < 0.5

    exact = machine_by_fidelity_excess(clone_geometry, max_fidelity_excess(clone_geometry))
    assert exact.theta_prime == pytest.approx(clone_geometry.theta_target, abs=1e-7)
    assert exact.fidelity == pytest.approx(1.0, abs=1e-12)


def test_delete_by_fidelity_excess_moves_toward_target(delete_geometry):
    machine = machine_by_fidelity_excess(delete_geometry, 0.004)
    assert delete_geometry.theta_target < machine.theta_prime < delete_geometry.theta_q
    assert machine.output_overlap > 0.25


def test_machine_by_fidelity_excess_rejects_invalid(clone_geometry):
    with pytest.raises(ValueError, match="nonnegative"):
        machine_by_fidelity_excess(clone_geometry, -0.001)
    with pytest.raises(ValueError, match="exceeds 1"):
        machine_by_fidelity_excess(clone_geometry, 0.05)
