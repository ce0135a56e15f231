import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spintransfer import (
    ChainSpec,
    RestStateKind,
    SpecError,
    TransferKernel,
    TransferMatrix,
    chain_propagator,
    classify,
    closed_form_r,
    closed_form_transfer,
    compute_info_system,
    compute_transfer_matrix,
    pst_check,
    receiver_state,
    rest_state,
)
from spintransfer.states import bloch_to_density, random_bloch
from spintransfer.transfer import (
    COMPLETE,
    NONE,
    PARTIAL,
    info_arrays,
    pair_index,
    rank_from_singular_values,
    receiver_observables,
)


def test_two_site_transfer_hand_derived():
    # sender |1> hops as cos(t/2)|10> + i sin(t/2)|01>
    spec = ChainSpec(2)
    t = 0.9
    c, s = np.cos(t / 2), np.sin(t / 2)
    tm = compute_transfer_matrix(spec, rest_state(spec), t=t)
    expected = np.zeros((4, 4), dtype=complex)
    expected[0, 0] = 1
    expected[0, 3] = c**2
    expected[3, 3] = s**2
    expected[1, 1] = -1j * s
    expected[2, 2] = 1j * s
    assert np.allclose(tm.data, expected, atol=1e-14)


def test_closed_form_values():
    assert closed_form_r(3, 0.0) == 0
    assert np.isclose(closed_form_r(3, np.sqrt(2) * np.pi), -1.0)
    assert closed_form_r(4, np.pi) == pytest.approx(-0.4411609728809329, abs=1e-15)
    with pytest.raises(SpecError):
        closed_form_r(5, 1.0)


def test_four_site_coherence_sign():
    # under U = exp(-iHt) the coherence entry carries -i r, the conjugate of the reference form
    spec = ChainSpec(4)
    tm = compute_transfer_matrix(spec, rest_state(spec), t=2.7)
    r = closed_form_r(4, 2.7)
    assert abs(tm.data[1, 1] - (-1j * r)) < 1e-13
    assert np.allclose(tm.data, closed_form_transfer(4, 2.7).data.conj(), atol=1e-13)


@pytest.mark.parametrize(
    "spec, kind",
    [
        (ChainSpec(3), RestStateKind.ground()),
        (ChainSpec(4, omegas=(0, 0.3, -0.2, 1.0)), RestStateKind.thermal(0.9)),
        (ChainSpec(5, sender=2, receiver=4, omegas=(0.1, 0, 0.2, 0.3, -0.1)), RestStateKind.thermal(1.5)),
        (ChainSpec(4, sender=3, receiver=1), RestStateKind.ground()),
    ],
)
def test_kernel_matches_probe(spec, kind):
    rest = rest_state(spec, kind)
    p = chain_propagator(spec)
    kernel = TransferKernel(spec, rest, p)
    times = np.linspace(0, 25, 11)
    fast = kernel.evaluate(times)
    for t, tm in zip(times, fast):
        ref = compute_transfer_matrix(spec, rest, p, t).data
        assert np.max(np.abs(ref - tm)) < 1e-13


def test_kernel_general_rest():
    rng = np.random.default_rng(3)
    spec = ChainSpec(3)
    g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rest = g @ g.conj().T
    rest /= np.trace(rest)
    p = chain_propagator(spec)
    ref = compute_transfer_matrix(spec, rest, p, 1.7).data
    assert np.max(np.abs(TransferKernel(spec, rest, p).evaluate([1.7])[0] - ref)) < 1e-13


def test_transfer_matrix_structure():
    spec = ChainSpec(4, omegas=(0, 0.5, 0.1, 0.2))
    tm = compute_transfer_matrix(spec, rest_state(spec, RestStateKind.thermal(1.0)), t=3.3)
    assert tm.trace_residual() < 1e-13
    assert tm.hermiticity_residual() < 1e-13
    assert tm.entry(0, 1, 0, 1) == tm.data[pair_index(0, 1), pair_index(0, 1)]


def test_info_system_reproduces_receiver():
    rng = np.random.default_rng(5)
    spec = ChainSpec(4, omegas=(0, 0.2, 0.4, 0.6))
    rest = rest_state(spec, RestStateKind.thermal(0.5))
    p = chain_propagator(spec)
    for _ in range(10):
        t = rng.uniform(0, 20)
        a = compute_info_system(compute_transfer_matrix(spec, rest, p, t))
        x = random_bloch(rng)
        obs = receiver_observables(receiver_state(spec, x, rest, t, p))
        assert np.allclose(a.apply(x), obs, atol=1e-13)


def test_info_arrays_batch_matches_single():
    spec = ChainSpec(3)
    rest = rest_state(spec)
    tms = TransferKernel(spec, rest).evaluate([0.5, 1.5])
    m, o = info_arrays(tms)
    single = compute_info_system(TransferMatrix(tms[1]))
    assert np.allclose(m[1], single.matrix) and np.allclose(o[1], single.offset)


def test_classify_ranks():
    assert classify(np.eye(3)).classification == COMPLETE
    c = classify(np.diag([1, 1e-3, 0]))
    assert (c.rank, c.classification) == (2, PARTIAL) and c.near_singular
    assert classify(np.zeros((3, 3))).classification == NONE
    assert classify(np.diag([1e-14, 1e-14, 1e-14])).rank == 0
    assert np.isinf(classify(np.zeros((3, 3))).condition_number)
    with pytest.raises(SpecError):
        classify(np.eye(3), rank_tol=0)


def test_rank_is_relative():
    assert rank_from_singular_values(np.array([1e-3, 1e-3, 1e-12])) == 2
    assert rank_from_singular_values(np.array([1e-6, 1e-6, 1e-6])) == 3


def test_three_site_pst_witness():
    spec = ChainSpec(3)
    tm = compute_transfer_matrix(spec, rest_state(spec), t=np.sqrt(2) * np.pi)
    res = pst_check(tm)
    assert res.is_pst_up_to_local_unitary and not res.is_pst_exact
    u = res.witness
    rho = bloch_to_density((0.2, 0.3, -0.1)).data
    assert np.allclose(tm.apply(rho), u @ rho @ u.conj().T, atol=1e-12)
    assert np.allclose(np.abs(np.diag(u)), 1) and abs(u[0, 0] + u[1, 1]) < 1e-12


def test_pst_not_at_generic_time():
    spec = ChainSpec(3)
    res = pst_check(compute_transfer_matrix(spec, rest_state(spec), t=2.0))
    assert not res.is_pst_up_to_local_unitary and res.witness is None


def test_pst_identity():
    assert pst_check(TransferMatrix(np.eye(4))).is_pst_exact


@settings(max_examples=500, deadline=None)
@given(st.integers(2, 5), st.integers(0, 2**32 - 1), st.floats(0, 60))
def test_linearity_property(n, seed, t):
    rng = np.random.default_rng(seed)
    spec = ChainSpec(n, omegas=tuple([0.0] + list(rng.uniform(-1, 1, n - 1))), beta=1.0)
    rest = rest_state(spec, RestStateKind.thermal())
    p = chain_propagator(spec)
    x = random_bloch(rng)
    tm = compute_transfer_matrix(spec, rest, p, t)
    full = receiver_state(spec, x, rest, t, p).data
    assert np.max(np.abs(tm.apply(bloch_to_density(x).data) - full)) < 1e-12
    assert tm.trace_residual() < 1e-12
