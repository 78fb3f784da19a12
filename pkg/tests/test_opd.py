import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opdkit.frames import basis_induced_family, coefficients, hermitian_basis, pauli_frame, verify_duality
from opdkit.hs import (
    PAULI,
    BipartiteOperator,
    apply_local_s,
    bell_state,
    dagger,
    is_density,
    partial_trace_e,
    partial_trace_s,
    random_density,
    tensor,
)
from opdkit.opd import (
    OPD,
    OPDTerm,
    NonPositiveFrameError,
    NotADensityError,
    cost,
    decompose,
    numerical_rank,
    reconstruct,
    reduce,
    reduced_state,
)
from opdkit.frames import orthonormal_frame, gellmann_basis
from opdkit.schmidt import schmidt_decompose

from conftest import random_two_qubit, realigned_rank

X, Y, Z, I2 = PAULI["X"], PAULI["Y"], PAULI["Z"], np.eye(2)
P0, P1 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
FRAMES = [pauli_frame, basis_induced_family]


def env_rank(ops, tol=1e-8):
    rows = coefficients(ops, hermitian_basis(ops.shape[-1]))
    return numerical_rank(rows, tol)


def test_bell_decomposition():
    o = decompose(bell_state(), pauli_frame(2))
    np.testing.assert_allclose(o.weights, [1 / np.sqrt(2)] * 4, atol=1e-14)
    expected = [I2 / 2, P0, (I2 - Y) / 2, (I2 + X) / 2]
    np.testing.assert_allclose(o.env_states, expected, atol=1e-14)
    np.testing.assert_allclose(reduced_state(o), I2 / 2, atol=1e-14)


def test_bell_env_operators_are_transposed_primal_elements():
    fr = pauli_frame(2)
    o = decompose(bell_state(), fr)
    np.testing.assert_allclose(o.env_operators(), fr.elements.transpose(0, 2, 1) / 2, atol=1e-14)


def test_product_state_terms_share_the_environment(rng):
    rs, re = random_density(2, rng), random_density(3, rng)
    o = decompose(tensor(rs, re), pauli_frame(2))
    for r in o.env_states:
        np.testing.assert_allclose(r, re, atol=1e-12)
    np.testing.assert_allclose(reduced_state(o), rs, atol=1e-12)


@pytest.mark.parametrize("build", FRAMES)
@pytest.mark.parametrize("ds,de", [(2, 2), (2, 3), (3, 2)])
def test_decomposition_properties(rng, build, ds, de):
    fr = build(ds)
    for _ in range(10):
        rho = BipartiteOperator(random_density(ds * de, rng), ds, de)
        o = decompose(rho, fr)
        assert o.term_count == ds * ds
        assert o.weights.min() >= -1e-12
        for r in o.env_states:
            assert is_density(r, 1e-10)
        np.testing.assert_allclose(reconstruct(o).matrix, rho.matrix, atol=1e-10)
        rho_s = partial_trace_e(rho)
        for f, w in zip(fr.elements, o.weights):
            # global trace form and reduced-state form
            glob = np.trace(np.kron(dagger(f), np.eye(de)) @ rho.matrix)
            assert abs(w - glob) <= 1e-12
            assert abs(w - np.trace(dagger(f) @ rho_s)) <= 1e-12
        for t in o.terms:
            f = fr.elements[t.index]
            np.testing.assert_allclose(t.env_operator, apply_local_s(rho, dagger(f)), atol=1e-12)
        np.testing.assert_allclose(reduced_state(o), rho_s, atol=1e-12)


def test_first_env_state_is_the_environment_marginal(rng):
    for _ in range(10):
        rho = random_two_qubit(rng)
        o = decompose(rho, pauli_frame(2))
        np.testing.assert_allclose(o.env_states[0], partial_trace_s(rho), atol=1e-10)


def test_vanishing_weight_gives_maximally_mixed_state():
    rho = tensor(P1, random_density(2, np.random.default_rng(1)))
    o = decompose(rho, basis_induced_family(2))
    assert o.weights[0] == pytest.approx(0, abs=1e-15)
    np.testing.assert_allclose(o.env_states[0], I2 / 2)


def test_decompose_rejects_non_density():
    with pytest.raises(NotADensityError):
        decompose(BipartiteOperator(np.diag([1.0, 1.0, -0.5, 0.0]), 2, 2), pauli_frame(2))


def test_decompose_rejects_non_positive_frame():
    with pytest.raises(NonPositiveFrameError):
        decompose(bell_state(), orthonormal_frame(gellmann_basis(2)))


def test_reconstruct_trivial_cases(rng):
    rs, re = random_density(2, rng), random_density(2, rng)
    single = OPD(2, 2, (OPDTerm(1.0, rs, re, 0),))
    np.testing.assert_allclose(reconstruct(single).matrix, np.kron(rs, re))
    np.testing.assert_allclose(reconstruct(OPD(2, 3, ())).matrix, np.zeros((6, 6)))


def test_reduce_product_to_one_term(rng):
    rho = tensor(random_density(2, rng), random_density(2, rng))
    r = reduce(decompose(rho, pauli_frame(2)))
    assert r.term_count == 1
    np.testing.assert_allclose(reconstruct(r).matrix, rho.matrix, atol=1e-9)


def test_bell_is_irreducible():
    r = reduce(decompose(bell_state(), pauli_frame(2)))
    assert r.term_count == 4 and r.certificate.eliminated == ()


def test_two_term_mixture_reduces_to_two(rng):
    rho = 0.5 * tensor(random_density(2, rng), P0) + 0.5 * tensor(random_density(2, rng), (I2 + X) / 2)
    assert reduce(decompose(rho, pauli_frame(2))).term_count == 2


def test_cost_canned():
    rng = np.random.default_rng(3)
    assert cost(tensor(random_density(2, rng), random_density(2, rng))) == 1
    assert cost(bell_state()) == 4
    classical = 0.5 * tensor(P0, random_density(2, rng)) + 0.5 * tensor(P1, random_density(2, rng))
    assert cost(classical) == 2


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([(2, 2), (2, 3), (3, 2)]), st.integers(1, 4))
def test_cost_equals_schmidt_rank_for_low_rank_mixtures(seed, dims, r):
    rng = np.random.default_rng(seed)
    ds, de = dims
    rho = sum(rng.uniform(0.2, 1) * tensor(random_density(ds, rng), random_density(de, rng)) for _ in range(r))
    rho = BipartiteOperator(rho.matrix / np.trace(rho.matrix).real, ds, de)
    expected = realigned_rank(rho, 1e-8)
    assert expected == min(r, ds * ds, de * de)
    for build in FRAMES:
        assert cost(rho, 1e-8, build(ds)) == expected


def _certificate_checks(source, fr, tol=1e-10):
    o = decompose(source, fr)
    r = reduce(o, tol)
    cert = r.certificate
    d = source.dim_s
    assert cert.original_count == d * d
    assert cert.final_count == r.term_count == cert.schmidt_rank
    assert cert.duality_residual <= 1e-9
    assert verify_duality(r.frame, tol=1e-9)[0]
    for b, resid in cert.vanishing_residuals.items():
        assert resid <= 1e-9, (b, resid)
    np.testing.assert_allclose(reconstruct(r).matrix, source.matrix, atol=10 * tol)
    # updated primal elements from q on the original frame
    np.testing.assert_allclose(np.einsum("ba,bij->aij", cert.q, fr.elements), cert.updated_primal, atol=1e-10)
    # f and g expand the same orthonormal basis on the dual pair
    np.testing.assert_allclose(cert.g @ cert.f, np.eye(d * d), atol=1e-9)
    # lambda_k G^E_k = Tr_S[(G_k (x) 1) rho] = sum_a g_ka w_a rho_a, zero beyond the rank
    sd = schmidt_decompose(source, tol)
    for k, gk in enumerate(cert.schmidt_basis):
        rhs = sum(cert.g[k, t.index] * t.env_operator for t in r.terms)
        np.testing.assert_allclose(apply_local_s(source, gk), rhs, atol=1e-9)
        lam = np.linalg.norm(rhs)
        if k < sd.rank:
            assert lam == pytest.approx(sd.coefficients[k], abs=1e-9)
        else:
            assert lam <= 1e-9
    # each eliminated state is the recorded combination of the others
    for b, c in zip(cert.eliminated, cert.dependency_coefficients):
        if o.terms[b].weight > tol:
            combo = np.einsum("a,aij->ij", c, o.env_states)
            np.testing.assert_allclose(o.env_states[b], combo, atol=1e-8)
    return r


@pytest.mark.parametrize("build", FRAMES)
def test_certificate_invariants(rng, build):
    cases = [
        tensor(random_density(2, rng), random_density(2, rng)),
        0.3 * tensor(random_density(2, rng), random_density(2, rng))
        + 0.7 * tensor(random_density(2, rng), random_density(2, rng)),
        bell_state(),
    ]
    for rho in cases:
        _certificate_checks(rho, build(2))


def test_certificate_on_qutrit_system(rng):
    rho = sum(tensor(random_density(3, rng), random_density(2, rng)) for _ in range(2))
    rho = BipartiteOperator(rho.matrix / 2, 3, 2)
    r = _certificate_checks(rho, pauli_frame(3))
    assert r.term_count == 2


def test_zero_discord_state(rng):
    # sum_i p_i Pi_i (x) eta_i with orthogonal projectors
    d = 3
    p = rng.dirichlet(np.ones(d))
    rho = sum(p[i] * tensor(np.diag(np.eye(d)[i]), random_density(2, rng)) for i in range(d))
    rho = BipartiteOperator(rho.matrix, d, 2)
    for build in FRAMES:
        r = reduce(decompose(rho, build(d)))
        assert r.term_count == min(d, 4)
        np.testing.assert_allclose(reconstruct(r).matrix, rho.matrix, atol=1e-9)
        for t in r.terms:
            if t.weight > 1e-10:
                assert is_density(t.env_state, 1e-10)


def _apply_kraus_s(rho, kraus):
    de = rho.dim_e
    return BipartiteOperator(
        sum(np.kron(k, np.eye(de)) @ rho.matrix @ np.kron(k, np.eye(de)).conj().T for k in kraus),
        rho.dim_s,
        de,
    )


def _channels(rng):
    g = 0.4
    amp = [np.array([[1, 0], [0, np.sqrt(1 - g)]]), np.array([[0, np.sqrt(g)], [0, 0]])]
    p = rng.dirichlet(np.ones(4))
    pauli = [np.sqrt(pk) * s for pk, s in zip(p, (I2, X, Y, Z))]
    reset = [P0, np.array([[0, 1], [0, 0]])]
    return [amp, pauli, reset]


def test_local_operations_do_not_increase_cost(rng):
    fr = pauli_frame(2)
    for _ in range(10):
        rho = random_two_qubit(rng)
        base = decompose(rho, fr).env_operators()
        for kraus in _channels(rng):
            out = _apply_kraus_s(rho, kraus)
            new = decompose(out, fr).env_operators()
            assert env_rank(new) <= env_rank(base)
            # stronger: the new operators stay in the old span
            assert env_rank(np.concatenate([base, new])) == env_rank(base)


def test_reduce_rejects_bad_input(rng):
    o = decompose(random_two_qubit(rng), pauli_frame(2))
    with pytest.raises(ValueError):
        reduce(o, 0.0)
    with pytest.raises(ValueError):
        reduce(OPD(2, 2, o.terms, None))


def test_reduced_state_unchanged_by_reduction(rng):
    rho = 0.5 * tensor(random_density(2, rng), P0) + 0.5 * tensor(random_density(2, rng), P1)
    o = decompose(rho, pauli_frame(2))
    np.testing.assert_allclose(reduced_state(reduce(o)), reduced_state(o), atol=1e-10)
