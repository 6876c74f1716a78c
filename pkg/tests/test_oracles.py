import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ensemblemix import HPOrder, MixParams, ModeSpec
from ensemblemix.fock import vacuum_state
from ensemblemix.integrator import EvolveConfig, evolve
from ensemblemix.observables import dominant_frequency
from ensemblemix.oracles import (
    DickeLiouvillian,
    MomentClosureError,
    MomentState,
    ResourceGuardExceeded,
    SpinSpace,
    dicke_evolve,
    moment_evolve,
    moment_rhs,
)

ZEROTH = HPOrder.ZEROTH


def linear_params(N1=10, N2=10, eta=0.5, omega=(0.3, 0.3), beta=1.0, delta_omega=5.0, cutoff=8, **kw):
    m1 = ModeSpec(cutoff, N1, gamma=1.0, beta=beta, omega_rabi=omega[0])
    m2 = ModeSpec(cutoff, N2, gamma=kw.pop("gamma2", 1.0), beta=beta, omega_rabi=omega[1])
    return MixParams(m1, m2, eta=eta, delta_omega=delta_omega, hp_order=ZEROTH, **kw)


# --- moment equations -------------------------------------------------------

def test_number_decay_rate():
    p = linear_params(eta=0.0, omega=(0.0, 0.0), beta=0.0, N1=7, cutoff=4)
    d = moment_rhs(MomentState(n1=1.0), 0.0, p)
    assert d.n1 == pytest.approx(-2 * 1.0 * 7)
    assert d.n2 == 0


def test_drive_from_vacuum():
    p = linear_params(omega=(0.8, 0.0))
    d = moment_rhs(MomentState.vacuum(), 0.0, p)
    assert d.a1 == pytest.approx(-1j * p.mode1.collective_rabi)
    assert d.a2 == 0
    assert d.n1 == 0 and d.c12 == 0


@given(st.lists(st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False), min_size=8, max_size=8),
       st.floats(0, 3))
def test_eta_zero_decouples_modes(values, t):
    p = linear_params(eta=0.0)
    state = MomentState.from_vector(values)
    # changing only mode-2 moments must leave mode-1 derivatives untouched
    other = MomentState(state.a1, 0.3 - 1j, state.n1, 7.0, state.c12, state.p12, state.s1, -2j)
    d, e = moment_rhs(state, t, p), moment_rhs(other, t, p)
    assert (d.a1, d.n1, d.s1) == (e.a1, e.n1, e.s1)
    # and the cross moments do not feed back into mode-1 quantities
    crossed = MomentState(state.a1, state.a2, state.n1, state.n2, 5.0, 4.0j, state.s1, state.s2)
    assert moment_rhs(crossed, t, p).n1 == d.n1


def test_closure_error_at_first_order():
    p = linear_params().replace(hp_order=HPOrder.FIRST)
    with pytest.raises(MomentClosureError):
        moment_rhs(MomentState.vacuum(), 0.0, p)
    with pytest.raises(MomentClosureError):
        moment_evolve(p, 1.0, 0.01)


def test_state_vector_roundtrip():
    s = MomentState(1j, 2, 3, 4, 5 - 1j, 6j, 7, 8)
    assert MomentState.from_vector(s.to_vector()) == s


def test_eta_zero_closed_form_transient():
    p = linear_params(eta=0.0, omega=(0.5, 0.2), N1=10, N2=10)
    series = moment_evolve(p, 1.0, 1e-3, sample_interval=0.05)
    m = p.mode1
    A = complex(m.gamma * m.atom_number, m.effective_detuning)
    for t, ne in zip(series.t, series["Ne1"]):
        a = -1j * m.collective_rabi / A * (1 - cmath.exp(-A * t))
        assert ne == pytest.approx(abs(a) ** 2, abs=1e-10)


@given(st.floats(0, 1), st.floats(0, 2), st.floats(-30, 30), st.floats(0.1, 2))
def test_number_moments_nonnegative_and_cauchy_schwarz(eta, omega, delta_omega, gamma2):
    p = linear_params(eta=eta, omega=(omega, 0.5 * omega), delta_omega=delta_omega, gamma2=gamma2)
    series = moment_evolve(p, 0.5, 5e-4, sample_interval=0.05)
    moments = series.meta["moments"]
    n = moments[:, 2:4]
    assert np.abs(n.imag).max() <= 1e-9
    assert n.real.min() >= -1e-9
    gap = n[:, 0].real * n[:, 1].real - np.abs(moments[:, 4]) ** 2
    assert gap.min() >= -1e-9


def test_agrees_with_density_matrix_evolution():
    p = linear_params(eta=0.5, omega=(0.6, 0.4), cutoff=9)
    rho_series = evolve(vacuum_state(p), EvolveConfig(t_end=0.5, dt=1e-3, sample_interval=0.05), params=p)
    mom = moment_evolve(p, 0.5, 1e-3, sample_interval=0.05)
    assert np.abs(rho_series["Ne1"] - mom["Ne1"]).max() < 1e-8
    assert np.abs(rho_series["Ne2"] - mom["Ne2"]).max() < 1e-8
    assert np.abs(rho_series["Imix_over_Ngamma"] - mom["Imix_over_Ngamma"]).max() < 1e-8


def test_large_laser_difference_averages_out_oscillation():
    base = MixParams(ModeSpec(8, 100, 1.0, 10.0, 0.0, 10.0), ModeSpec(8, 100, 1.0, 10.0, 0.0, 10.0),
                     eta=0.5, delta_omega=50.0, hp_order=ZEROTH)
    far = base.replace(delta_omega=100 * base.eta * base.gamma12 * 100)
    window = (1.0, 2.0)
    amp = []
    for p in (base, far):
        dt = min(2e-4, 2 * math.pi / abs(p.delta_omega) / 50)
        s = moment_evolve(p, 2.0, dt, sample_interval=dt * max(1, round(5e-4 / dt)))
        amp.append(dominant_frequency(s, "Ne1", window).amplitude)
    assert amp[1] * 10 <= amp[0]


# --- exact spin oracle ------------------------------------------------------

@pytest.mark.parametrize("N", [1, 2, 5, 17, 60])
def test_spin_commutators_exact(N):
    s = SpinSpace(N)
    up, dn, z = s.s_plus().toarray(), s.s_minus().toarray(), s.s_z().toarray()
    assert s.dim == N + 1
    assert np.abs(up @ dn - dn @ up - 2 * z).max() < 1e-12 * max(1, N)
    assert np.abs(z @ up - up @ z - up).max() < 1e-12 * max(1, N)
    assert np.abs(z @ dn - dn @ z + dn).max() < 1e-12 * max(1, N)


def test_spin_space_cap_and_validation():
    assert SpinSpace(40, max_excitation=6).dim == 7
    assert SpinSpace(3, max_excitation=6).dim == 4
    with pytest.raises(ValueError):
        SpinSpace(0)
    with pytest.raises(ValueError):
        SpinSpace(4, max_excitation=0)


def test_single_atoms_decay():
    m = ModeSpec(1, 1, gamma=0.7, beta=0.3, delta=0.2)
    p = MixParams(m, m, eta=0.0)
    rho0 = np.zeros((4, 4), dtype=complex)
    rho0[2, 2] = 1.0  # first atom excited, second in the ground state
    s = dicke_evolve(p, 2.0, 0.1, rho0=rho0)
    assert np.allclose(s["Ne1"], np.exp(-2 * 0.7 * s.t), atol=1e-9)
    assert np.allclose(s["Ne2"], 0.0, atol=1e-12)


def test_undriven_ground_state_is_stationary():
    m = ModeSpec(1, 6, gamma=1.0, beta=0.5)
    p = MixParams(m, m, eta=0.0)
    liou = DickeLiouvillian(p)
    assert np.abs(liou(0.3, liou.ground_state().ravel())).max() == 0.0
    s = dicke_evolve(p, 1.0, 0.25)
    assert np.all(s["Ne1"] == 0) and np.all(s["Ne2"] == 0)


def test_dicke_conserves_density_matrix_properties():
    m = ModeSpec(1, 6, gamma=1.0, beta=0.8, omega_rabi=0.9)
    p = MixParams(m, ModeSpec(1, 5, gamma=0.5, beta=0.4, omega_rabi=0.4), eta=0.7, delta_omega=3.0)
    s = dicke_evolve(p, 1.0, 0.05)
    assert s["trace_err"].max() <= 1e-8
    assert s["herm_err"].max() <= 1e-10
    assert s.min_eig.min() >= -1e-8
    assert s["Ne1"].max() > 0.01


def test_excitation_cap_agrees_when_population_small():
    m = ModeSpec(1, 12, gamma=1.0, beta=0.5, omega_rabi=0.3)
    p = MixParams(m, m, eta=0.5, delta_omega=4.0)
    full = dicke_evolve(p, 0.5, 0.1)
    capped = dicke_evolve(p, 0.5, 0.1, max_excitation=6)
    assert capped.meta["dim"] < full.meta["dim"]
    assert capped["top1"].max() < 1e-8
    assert np.abs(full["Ne1"] - capped["Ne1"]).max() < 1e-7


def test_resource_guard():
    m = ModeSpec(4, 100)
    with pytest.raises(ResourceGuardExceeded):
        DickeLiouvillian(MixParams(m, m))
