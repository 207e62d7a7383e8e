import math

import numpy as np
import pytest

from dqc1.circuit import dqc1_output
from dqc1.correlations import (
    CorrelationProfile,
    bell_quantity,
    control_coherence,
    control_coherences,
    fano_decompose,
    fano_reconstruct,
    geometric_discord,
    l1_coherence,
    measure_all,
    measure_batch,
    negativity,
    normalize_correlation,
    violates_bell,
)
from dqc1.qla import IDENTITY_2, kron
from dqc1.sampling import RngStream, control_state, draw_circuit_inputs, haar_unitary, hs_mixed_state

MIXED = np.eye(4, dtype=np.complex128) / 4


def bell_state():
    ket = np.array([1, 0, 0, 1], dtype=np.complex128) / math.sqrt(2.0)
    return np.outer(ket, ket.conj())


def werner(p):
    return p * bell_state() + (1 - p) * MIXED


def test_fano_of_fully_mixed():
    decomposition = fano_decompose(MIXED)
    assert np.allclose(decomposition.s, 0)
    assert np.allclose(decomposition.r, 0)
    assert np.allclose(decomposition.C, 0)


@pytest.mark.parametrize("alpha", [0.0, 0.3, 1.0])
def test_fano_of_control_state(alpha):
    decomposition = fano_decompose(kron(control_state(alpha), IDENTITY_2 / 2))
    assert np.allclose(decomposition.s, [0, 0, alpha])
    assert np.allclose(decomposition.r, 0)
    assert np.allclose(decomposition.C, 0)


def test_fano_of_bell_state():
    decomposition = fano_decompose(bell_state())
    assert np.allclose(decomposition.s, 0)
    assert np.allclose(decomposition.r, 0)
    assert np.allclose(decomposition.C, np.diag([1, -1, 1]))


@pytest.mark.parametrize("stream", range(10))
def test_fano_reconstructs_state(stream):
    rho = hs_mixed_state(4, RngStream(31, stream))
    assert np.allclose(fano_reconstruct(fano_decompose(rho)), rho, atol=1e-12)


def test_bell_state_measures():
    rho = bell_state()
    assert bell_quantity(rho) == pytest.approx(2 * math.sqrt(2))
    assert negativity(rho) == pytest.approx(0.5)
    assert geometric_discord(rho) == pytest.approx(0.5)
    assert l1_coherence(rho) == pytest.approx(1.0)


def test_fully_mixed_measures():
    profile = measure_all(MIXED)
    assert profile == CorrelationProfile(bell=0.0, negativity=0.0, discord=0.0, coherence=0.0)


def test_werner_negativity():
    assert negativity(werner(0.5)) == pytest.approx(0.125)
    assert negativity(werner(0.3)) == pytest.approx(0.0, abs=1e-12)


def test_product_state_has_no_negativity():
    rho = kron(hs_mixed_state(2, RngStream(32, 0)), hs_mixed_state(2, RngStream(32, 1)))
    assert negativity(rho) == pytest.approx(0.0, abs=1e-12)


def test_classical_state_has_no_discord_or_coherence():
    rho = np.diag([0.1, 0.2, 0.3, 0.4]).astype(np.complex128)
    assert geometric_discord(rho) == pytest.approx(0.0, abs=1e-12)
    assert l1_coherence(rho) == 0.0


def test_maximally_coherent_state():
    assert l1_coherence(np.full((4, 4), 0.25)) == pytest.approx(3.0)


@pytest.mark.parametrize("stream", range(40))
def test_standard_circuit_has_no_entanglement_or_violation(stream):
    rho0, u1 = draw_circuit_inputs(RngStream(33, stream), "mixed-hs")
    rho_bf = dqc1_output(rho0, u1)
    assert negativity(rho_bf) < 1e-10
    assert bell_quantity(rho_bf) <= 2 + 1e-9
    assert geometric_discord(rho_bf) <= 0.125 + 1e-9


@pytest.mark.parametrize("stream", range(10))
def test_local_unitary_invariance(stream):
    gen = RngStream(34, stream).generator()
    rho = hs_mixed_state(4, gen)
    local = kron(haar_unitary(2, gen), haar_unitary(2, gen))
    moved = local @ rho @ local.conj().T
    for measure in (bell_quantity, negativity, geometric_discord):
        assert measure(moved) == pytest.approx(measure(rho), abs=1e-9)


@pytest.mark.parametrize(
    ("value", "which", "expected"),
    [
        (2.0, "bell", 1 / math.sqrt(2)),
        (0.5, "negativity", 1.0),
        (0.0, "discord", 0.0),
        (1.5, "coherence", 0.5),
    ],
)
def test_normalize_correlation(value, which, expected):
    assert normalize_correlation(value, which) == pytest.approx(expected)


def test_normalize_correlation_rejects_out_of_range():
    with pytest.raises(ValueError):
        normalize_correlation(0.6, "negativity")
    with pytest.raises(ValueError):
        normalize_correlation(-0.1, "discord")
    with pytest.raises(ValueError):
        normalize_correlation(0.1, "entropy")


def test_profile_normalized():
    profile = measure_all(bell_state()).normalized()
    assert profile.bell == pytest.approx(1.0)
    assert profile.negativity == pytest.approx(1.0)
    assert profile.discord == pytest.approx(1.0)
    assert profile.coherence == pytest.approx(1 / 3)


def test_measure_batch_matches_single_states():
    gen = RngStream(36, 0).generator()
    states = [hs_mixed_state(4, gen) for _ in range(4)] + [bell_state(), MIXED, werner(0.5)]
    batch = measure_batch(np.array(states))
    for profile, state in zip(batch, states):
        single = measure_all(state)
        for name in ("bell", "negativity", "discord", "coherence"):
            assert getattr(profile, name) == pytest.approx(getattr(single, name), abs=1e-12)
    assert measure_batch(np.zeros((0, 4, 4))) == []


def test_control_coherence():
    plus = np.full((2, 2), 0.5, dtype=np.complex128)
    assert control_coherence(kron(plus, IDENTITY_2 / 2)) == pytest.approx(1.0)
    assert control_coherence(bell_state()) == pytest.approx(0.0, abs=1e-15)
    assert l1_coherence(kron(plus, IDENTITY_2 / 2)) == pytest.approx(1.0)
    stack = np.array([kron(plus, IDENTITY_2 / 2), bell_state(), MIXED])
    assert np.allclose(control_coherences(stack), [1.0, 0.0, 0.0], atol=1e-15)


@pytest.mark.parametrize("stream", range(5))
def test_standard_circuit_control_coherence_is_at_most_one(stream):
    rho0, u1 = draw_circuit_inputs(RngStream(37, stream), "mixed-hs")
    rho_bf = dqc1_output(rho0, u1)
    assert 0.0 <= control_coherence(rho_bf) <= 1.0 + 1e-12
    assert l1_coherence(rho_bf) >= control_coherence(rho_bf) - 1e-12


def test_violates_bell_ignores_round_off():
    assert not violates_bell(2.0)
    assert not violates_bell(2.0 + 1e-12)
    assert violates_bell(2.0 + 1e-6)
    assert violates_bell(bell_quantity(bell_state()))
