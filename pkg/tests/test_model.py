import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ensemblemix import HPOrder, MixParams, ModeSpec, apply_rhs, build_generator, phase
from ensemblemix.model import hp_lowering, literal_rhs, lowering_elements, number_interaction

from conftest import random_density, random_hermitian, small_params


def exact_dicke_lowering(N, M):
    m = np.arange(M + 1, dtype=float)
    return np.sqrt(m * (N - m + 1))


def test_lowering_elements_orders():
    mode = ModeSpec(6, 40)
    zeroth = lowering_elements(HPOrder.ZEROTH, mode)
    first = lowering_elements(HPOrder.FIRST, mode)
    exact = exact_dicke_lowering(40, 6)
    assert np.allclose(zeroth, np.sqrt(40) * np.sqrt(np.arange(7)))
    assert zeroth[0] == first[0] == 0.0
    # first order tracks the exact spin element better than zeroth order
    assert np.all(np.abs(first - exact)[2:] < np.abs(zeroth - exact)[2:])
    # the one-excitation element is exact at first order
    assert first[1] == pytest.approx(exact[1])


def test_pair_identity_matches_spin_algebra():
    # S+ S- on |m> is m (N - m + 1) for the spin; the HP identity is N m - m (m - 1)
    N, M = 25, 7
    diag = number_interaction(ModeSpec(M, N)).diagonal().real
    assert np.allclose(diag, exact_dicke_lowering(N, M) ** 2)


def test_hp_lowering_shape():
    s = hp_lowering(HPOrder.FIRST, ModeSpec(4, 10)).toarray()
    assert s.shape == (5, 5)
    assert np.allclose(np.tril(s), 0)


def test_hamiltonian_hermitian_and_phase():
    p = small_params()
    gen = build_generator(p)
    for t in (0.0, 0.37, 2.0):
        H = gen.hamiltonian(t).toarray()
        assert np.allclose(H, H.conj().T)
    assert phase(1.0, p) == pytest.approx(-p.phi0 + p.delta_omega)


def test_dropped_constant_recorded():
    p = small_params()
    gen = build_generator(p)
    expected = -0.5 * sum((m.delta - m.beta) * m.atom_number for m in p.modes)
    assert gen.metadata["dropped_constant_energy"] == pytest.approx(expected)
    assert gen.metadata["hp_order"] == "FIRST"


def test_zero_generator_gives_zero_rhs(rng):
    p = MixParams(ModeSpec(2, 5, gamma=0.0), ModeSpec(2, 5, gamma=0.0), eta=0.3, delta_omega=1.0)
    rho = random_density(p.dim, rng)
    assert np.array_equal(apply_rhs(rho, 0.3, build_generator(p)), np.zeros_like(rho))


@pytest.mark.parametrize("order", [HPOrder.ZEROTH, HPOrder.FIRST])
@pytest.mark.parametrize("backend", ["cython", "python"])
def test_banded_kernel_matches_commutator_form(order, backend, rng):
    p = small_params(order=order)
    gen = build_generator(p)
    for t in (0.0, 0.8):
        rho = random_density(p.dim, rng)
        assert np.allclose(apply_rhs(rho, t, gen, backend=backend), literal_rhs(rho, t, gen), atol=1e-12)


def test_params_mismatch_rejected(rng):
    p = small_params()
    gen = build_generator(p)
    with pytest.raises(ValueError):
        apply_rhs(np.eye(p.dim) / p.dim, 0.0, gen, params=small_params(eta=0.1))
    with pytest.raises(ValueError):
        apply_rhs(np.eye(3), 0.0, gen)


params_strategy = st.builds(
    lambda M1, M2, N1, N2, eta, b1, b2, g2, w1, w2, dw, phi0, order: MixParams(
        ModeSpec(M1, max(N1, M1), 1.0, b1, 0.2, w1),
        ModeSpec(M2, max(N2, M2), g2, b2, -0.1, w2),
        eta=eta, delta_omega=dw, phi0=phi0, hp_order=order,
    ),
    st.integers(1, 4), st.integers(1, 4), st.integers(4, 60), st.integers(4, 60),
    st.floats(0, 1), st.floats(0, 3), st.floats(0, 3), st.floats(0.1, 2),
    st.floats(-2, 2), st.floats(-2, 2), st.floats(-20, 20), st.floats(-np.pi, np.pi),
    st.sampled_from(list(HPOrder)),
)


@given(params_strategy, st.floats(0, 5), st.integers(0, 2**32 - 1))
def test_rhs_preserves_trace_and_hermiticity(p, t, seed):
    rng = np.random.default_rng(seed)
    gen = build_generator(p)
    rho = random_hermitian(p.dim, rng)
    d = apply_rhs(rho, t, gen)
    scale = max(1.0, np.abs(d).max())
    assert abs(np.trace(d)) <= 1e-12 * scale * p.dim
    assert np.abs(d - d.conj().T).max() <= 1e-12 * scale


@given(params_strategy, st.floats(0, 5), st.integers(0, 2**32 - 1))
def test_rhs_linear(p, t, seed):
    rng = np.random.default_rng(seed)
    gen = build_generator(p)
    a, b = random_hermitian(p.dim, rng), random_hermitian(p.dim, rng)
    lhs = apply_rhs(2.0 * a - 0.5 * b, t, gen)
    rhs = 2.0 * apply_rhs(a, t, gen) - 0.5 * apply_rhs(b, t, gen)
    assert np.allclose(lhs, rhs, atol=1e-10 * max(1.0, np.abs(rhs).max()))


@given(params_strategy, st.floats(0, 3), st.floats(0, 3))
def test_eta_zero_is_phase_independent(p, t1, t2):
    p = p.replace(eta=0.0)
    gen = build_generator(p)
    rho = random_density(p.dim, np.random.default_rng(1))
    assert np.allclose(apply_rhs(rho, t1, gen), apply_rhs(rho, t2, gen), atol=1e-12)
