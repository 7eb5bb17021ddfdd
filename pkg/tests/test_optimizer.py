import logging

import numpy as np
import pytest
from scipy.optimize import approx_fprime

from signalscope.hilbert import basis_state
from signalscope.machines import MachineKind
from signalscope.machines import StatePair
from signalscope.machines import anchor_states
from signalscope.machines import optimal_fidelity
from signalscope.machines import optimal_fidelity_for_overlap
from signalscope.machines import pair_fidelity
from signalscope.machines import qubit_pair_from_overlap
from signalscope.optimizer import SearchConfig
from signalscope.optimizer import SearchError
from signalscope.optimizer import filter_search
from signalscope.optimizer import gram_constrained_max
from signalscope.optimizer import gram_fidelity_and_gradient
from signalscope.optimizer import hermitian_from_params
from signalscope.optimizer import unitary_fidelity_and_gradient
from signalscope.optimizer import unitary_from_params
from signalscope.optimizer import unitary_search


def test_search_config_validation():
    with pytest.raises(ValueError, match="restarts"):
        SearchConfig(restarts=0)
    with pytest.raises(ValueError, match="tolerance"):
        SearchConfig(tolerance=0.0)


def test_restart_generators_are_reproducible():
    config = SearchConfig(seed=7)
    first = config.rng_for(3).normal(size=5)
    again = config.rng_for(3).normal(size=5)
    other = config.rng_for(4).normal(size=5)
    assert np.array_equal(first, again)
    assert not np.array_equal(first, other)


def test_search_error_carries_best_value():
    error = SearchError("no luck", 0.9, best_certificate="cert")
    assert error.best_value == 0.9
    assert error.best_certificate == "cert"
    assert "0.9" in str(error)


def test_hermitian_and_unitary_parameterization(rng):
    params = rng.normal(size=16)
    h = hermitian_from_params(params, 4)
    assert np.allclose(h, h.conj().T)
    u = unitary_from_params(params, 4)
    assert np.allclose(u.conj().T @ u, np.eye(4), atol=1e-10)
    with pytest.raises(ValueError):
        hermitian_from_params(params[:10], 4)


def test_gram_max_is_one_when_forced_overlap_matches_targets(half_pair, small_search):
    _, targets = anchor_states(half_pair, MachineKind.CLONE)
    fidelity, outputs = gram_constrained_max(targets, 0.25, small_search)
    assert fidelity == pytest.approx(1.0, abs=1e-8)
    assert outputs.overlap == pytest.approx(0.25, abs=1e-10)


def test_gram_max_for_orthogonal_targets_forced_identical(small_search):
    targets = StatePair(basis_state(4, 0), basis_state(4, 3))
    fidelity, _ = gram_constrained_max(targets, 1.0, small_search)
    assert fidelity == pytest.approx(1 / np.sqrt(2), abs=1e-6)


def test_gram_max_matches_cone_formula(clone_geometry, small_search):
    fidelity, outputs = gram_constrained_max(clone_geometry.targets, 0.5, small_search)
    assert fidelity == pytest.approx(optimal_fidelity(clone_geometry)[0], abs=1e-6)
    assert outputs.overlap == pytest.approx(0.5, abs=1e-10)
    assert pair_fidelity(clone_geometry.targets, outputs) == pytest.approx(fidelity, abs=1e-12)


def test_gram_max_rejects_invalid_overlap(clone_geometry):
    with pytest.raises(ValueError):
        gram_constrained_max(clone_geometry.targets, 1.5)


def test_unitary_search_trivial_cases(small_search):
    inputs = StatePair(basis_state(4, 0), basis_state(4, 1))
    assert unitary_search(inputs, inputs, 4, small_search).fidelity == pytest.approx(1.0, abs=1e-8)

    targets = StatePair(basis_state(4, 2), basis_state(4, 3))
    assert unitary_search(inputs, targets, 4, small_search).fidelity == pytest.approx(
        1.0, abs=1e-8
    )


def test_unitary_search_matches_cone_formula(clone_geometry, small_search):
    result = unitary_search(clone_geometry.inputs, clone_geometry.targets, 4, small_search)
    assert result.fidelity == pytest.approx(optimal_fidelity(clone_geometry)[0], abs=1e-6)
    assert 0 <= result.restart < small_search.restarts
    assert result.converged_restarts >= 1

    u = result.unitary
    assert np.allclose(u.conj().T @ u, np.eye(4), atol=1e-10)
    achieved = (
        np.vdot(clone_geometry.targets.psi.amplitudes, u @ clone_geometry.inputs.psi.amplitudes).real
        + np.vdot(clone_geometry.targets.phi.amplitudes, u @ clone_geometry.inputs.phi.amplitudes).real
    ) / 2
    assert achieved == pytest.approx(result.fidelity, abs=1e-12)


def test_unitary_search_is_deterministic(clone_geometry):
    config = SearchConfig(restarts=2, seed=11)
    first = unitary_search(clone_geometry.inputs, clone_geometry.targets, 4, config)
    second = unitary_search(clone_geometry.inputs, clone_geometry.targets, 4, config)
    assert first.fidelity == second.fidelity
    assert first.restart == second.restart
    assert np.array_equal(first.unitary, second.unitary)


@pytest.mark.parametrize("s", [0.3, 0.7])
def test_deleting_optimum_equals_cloning_optimum(s, small_search):
    inputs, targets = anchor_states(qubit_pair_from_overlap(s), MachineKind.DELETE)
    found = unitary_search(inputs, targets, 4, small_search).fidelity
    assert found == pytest.approx(optimal_fidelity_for_overlap(s, MachineKind.CLONE), abs=1e-6)


def test_ancilla_does_not_beat_the_optimum(clone_geometry):
    config = SearchConfig(restarts=2, seed=0)
    found = unitary_search(clone_geometry.inputs, clone_geometry.targets, 5, config).fidelity
    assert found <= optimal_fidelity(clone_geometry)[0] + 1e-6


def test_unitary_search_rejects_small_dimension(clone_geometry):
    with pytest.raises(ValueError):
        unitary_search(clone_geometry.inputs, clone_geometry.targets, 3, SearchConfig(restarts=1))


def test_filter_search_reaches_closed_form():
    result = filter_search(0.8, SearchConfig(restarts=8, seed=0))
    assert result.probability == pytest.approx(0.625, abs=1e-6)
    assert np.linalg.norm(result.filter, 2) <= 1 + 1e-8


def test_filter_search_rejects_invalid_weight():
    with pytest.raises(ValueError):
        filter_search(0.3)
    with pytest.raises(ValueError):
        filter_search(1.0)


@pytest.mark.parametrize("s", [0.05, 0.25, 0.5, 0.75, 0.95])
def test_oracles_agree_across_overlaps(s, small_search):
    inputs, targets = anchor_states(qubit_pair_from_overlap(s), MachineKind.CLONE)
    cone = optimal_fidelity_for_overlap(s, MachineKind.CLONE)
    gram, _ = gram_constrained_max(targets, inputs.overlap, small_search)
    unitary = unitary_search(inputs, targets, 4, small_search).fidelity
    assert gram == pytest.approx(cone, abs=1e-6)
    assert unitary == pytest.approx(cone, abs=1e-6)


def test_unitary_gradient_matches_finite_differences(rng, clone_geometry):
    coupling = clone_geometry.inputs.as_matrix() @ clone_geometry.targets.as_matrix().conj().T
    params = rng.uniform(-np.pi, np.pi, size=16)
    value, grad = unitary_fidelity_and_gradient(params, 4, coupling)

    u = unitary_from_params(params, 4)
    assert value == pytest.approx(np.real(np.trace(u @ coupling)) / 2, abs=1e-12)
    numeric = approx_fprime(params, lambda p: unitary_fidelity_and_gradient(p, 4, coupling)[0], 1e-7)
    assert np.allclose(grad, numeric, atol=1e-5)


def test_unitary_gradient_with_repeated_eigenvalues(clone_geometry):
    coupling = clone_geometry.inputs.as_matrix() @ clone_geometry.targets.as_matrix().conj().T
    params = np.zeros(16)
    params[:4] = 0.3
    _, grad = unitary_fidelity_and_gradient(params, 4, coupling)
    numeric = approx_fprime(params, lambda p: unitary_fidelity_and_gradient(p, 4, coupling)[0], 1e-7)
    assert np.allclose(grad, numeric, atol=1e-5)


@pytest.mark.parametrize("forced_overlap", [0.0, 0.5, 0.9])
def test_gram_gradient_matches_finite_differences(rng, clone_geometry, forced_overlap):
    targets = clone_geometry.targets
    params = rng.normal(size=16)
    value, grad = gram_fidelity_and_gradient(params, targets, forced_overlap)
    numeric = approx_fprime(
        params, lambda p: gram_fidelity_and_gradient(p, targets, forced_overlap)[0], 1e-7
    )
    assert np.allclose(grad, numeric, atol=1e-5)
    assert -1.0 <= value <= 1.0


def test_gram_objective_is_finite_at_zero_parameters(clone_geometry):
    value, grad = gram_fidelity_and_gradient(np.zeros(16), clone_geometry.targets, 0.5)
    assert np.isfinite(value)
    assert np.all(np.isfinite(grad))


@pytest.mark.parametrize("kind", [MachineKind.CLONE, MachineKind.DELETE])
def test_default_searches_converge_on_every_restart(caplog, kind):
    inputs, targets = anchor_states(qubit_pair_from_overlap(0.5), kind)
    with caplog.at_level(logging.WARNING, logger="signalscope.optimizer"):
        gram, _ = gram_constrained_max(targets, inputs.overlap)
        result = unitary_search(inputs, targets, 4)
    assert not [r for r in caplog.records if "did not converge" in r.getMessage()]
    assert result.converged_restarts == SearchConfig().restarts
    cone = optimal_fidelity_for_overlap(0.5, kind)
    assert gram == pytest.approx(cone, abs=1e-6)
    assert result.fidelity == pytest.approx(cone, abs=1e-6)
