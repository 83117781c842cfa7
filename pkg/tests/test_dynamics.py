import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from kickedtop import reduction
from kickedtop.dynamics import (
    FloquetParams,
    RationalKick,
    build_floquet,
    closed_form_power,
    evolve,
    local_sigmaz_product,
    parity_operator,
    parse_p,
    phase_residual,
    verify_parity_lu_identity,
)
from kickedtop.measures import report
from kickedtop.spinalg import ContractError, DickeVector, SpinQuantum, coherent_state

J1 = SpinQuantum(2)


def test_parse_p():
    assert parse_p("pi/2") == (np.pi / 2, 1)
    assert parse_p("3pi/2") == (3 * np.pi / 2, 3)
    assert parse_p("0") == (0.0, 0)
    assert parse_p("0.7") == (0.7, None)
    assert parse_p(1.2) == (1.2, None)
    with pytest.raises(ContractError):
        parse_p("pie")


def test_rational_kick_reduces():
    kick = RationalKick(4, 10)
    assert (kick.r, kick.s) == (2, 5)
    assert kick.k == pytest.approx(2 * np.pi / 5)
    with pytest.raises(ContractError):
        RationalKick(0, 3)


@pytest.mark.parametrize("k", [0.0, 0.4, 1.3, 5.0])
def test_floquet_half_pi(k):
    e = np.exp(-1j * k / 2)
    r = 1 / np.sqrt(2)
    ref = np.array([[e / 2, -e * r, e / 2], [r, 0, -r], [e / 2, e * r, e / 2]])
    u = build_floquet(FloquetParams.make(J1, k, "pi/2"))
    assert np.max(np.abs(u - ref)) < 1e-12


def test_floquet_pi_and_identity():
    k = 0.9
    e = np.exp(-1j * k / 2)
    u = build_floquet(FloquetParams.make(J1, k, "pi"))
    assert_allclose(u, [[0, 0, e], [0, -1, 0], [e, 0, 0]], atol=1e-12)
    assert_allclose(build_floquet(FloquetParams.make(SpinQuantum(5), 0.0, 0.0)), np.eye(6), atol=1e-14)


@given(st.integers(1, 12), st.floats(-20, 20), st.floats(-7, 7))
@settings(max_examples=40)
def test_floquet_unitary(two_j, k, p):
    u = build_floquet(FloquetParams.make(SpinQuantum(two_j), k, p))
    assert_allclose(u @ u.conj().T, np.eye(two_j + 1), atol=1e-12)


def test_zero_kick_keeps_coherent_states():
    spin = SpinQuantum(4)
    params = FloquetParams.make(spin, 0.0, "pi/2")
    rec = evolve(params, coherent_state(spin, 2.5, 1.1), 12)
    for t, psi in enumerate(rec.states):
        # k=0 rotates about y by t*pi/2; compare with the rotated coherent state via its Bloch angles
        r1 = reduction.dicke_rdm(psi, 1).entries
        bloch = np.array([2 * r1[0, 1].real, -2 * r1[0, 1].imag, (r1[0, 0] - r1[1, 1]).real])
        assert abs(np.linalg.norm(bloch) - 1) < 1e-12
        rep = report(psi)
        assert max(abs(v) for v in rep.present().values()) < 1e-10
    assert rec.renormalizations == 0


def test_entropy_period_160():
    kick = RationalKick(1, 40)
    params = FloquetParams.make(J1, kick.k, "pi/2")
    rec = evolve(params, coherent_state(J1, 2.5, 1.1), 320)
    s = np.array([report(x, measures=("s_vn_1",)).s_vn_1 for x in rec.states])
    assert np.max(np.abs(s[:161] - s[160:])) < 1e-8
    # and not a shorter period
    assert np.max(np.abs(s[:81] - s[80:161])) > 1e-3


def test_evolve_matches_closed_form(rng):
    for _ in range(5):
        k = rng.uniform(0, 2 * np.pi)
        psi0 = coherent_state(J1, 2.5, 1.1)
        rec = evolve(FloquetParams.make(J1, k, "pi/2"), psi0, 37)
        ref = closed_form_power(k, "pi/2", 37) @ psi0.amplitudes
        assert np.max(np.abs(rec.states[37].amplitudes - ref)) < 1e-10


@given(st.floats(-10, 10), st.integers(0, 40), st.sampled_from(["pi/2", "pi"]))
@settings(max_examples=60)
def test_closed_form_vs_matrix_power(k, n, p):
    u = build_floquet(FloquetParams.make(J1, k, p))
    assert_allclose(closed_form_power(k, p, n), np.linalg.matrix_power(u, n), atol=1e-10)


def test_closed_form_examples():
    for r, s in [(1, 40), (3, 7), (5, 2)]:
        k = RationalKick(r, s).k
        assert_allclose(closed_form_power(k, "pi/2", 4 * s), [[0, 0, 1], [0, -1, 0], [1, 0, 0]], atol=1e-10)
    for r, s in [(2, 5), (6, 7), (10, 3)]:
        k = RationalKick(r, s).k
        assert_allclose(closed_form_power(k, "pi/2", 2 * s), np.eye(3), atol=1e-10)
    assert_allclose(closed_form_power(0.3, "pi", 0), np.eye(3), atol=1e-15)
    with pytest.raises(ContractError):
        closed_form_power(0.3, "2pi", 1)


def test_parity_examples():
    assert_allclose(parity_operator(J1), np.diag([-1, 1, -1]), atol=1e-15)
    assert_allclose(parity_operator(SpinQuantum(4)), np.diag([1, -1, 1, -1, 1]), atol=1e-15)
    ph = np.exp(-1j * np.pi / 4)
    assert_allclose(parity_operator(SpinQuantum(1)), np.diag([ph, ph]), atol=1e-15)


def test_local_sigmaz_product(rng):
    v = DickeVector.normalized(J1, [0.6, 0.48j, 0.64])
    assert_allclose(local_sigmaz_product(v).amplitudes, [0.6, -0.48j, 0.64])
    top = DickeVector.basis(SpinQuantum(4), 0)
    assert_allclose(local_sigmaz_product(top).amplitudes, top.amplitudes)
    psi = DickeVector.random(SpinQuantum(4), rng)
    full_in = reduction.expand_to_qubits(psi).amplitudes
    full_out = reduction.expand_to_qubits(local_sigmaz_product(psi)).amplitudes
    signs = np.array([(-1) ** bin(i).count("1") for i in range(16)])
    assert phase_residual(full_out, signs * full_in) < 1e-12


def test_parity_lu_identity(rng):
    for _ in range(100):
        assert verify_parity_lu_identity(SpinQuantum(4), DickeVector.random(SpinQuantum(4), rng)).residual < 1e-12
    res = verify_parity_lu_identity(J1, DickeVector.normalized(J1, [0.3, 0.5 - 0.2j, 0.7]))
    assert res.ok and res.residual < 1e-14
    half = verify_parity_lu_identity(SpinQuantum(1), DickeVector.random(SpinQuantum(1), rng))
    assert half.residual < 1e-14 and half.local_unitary == "identity"


def test_evolve_contract():
    params = FloquetParams.make(J1, 1.0, "pi/2")
    with pytest.raises(ContractError):
        evolve(params, coherent_state(SpinQuantum(3), 1.0, 0.0), 3)
    with pytest.raises(ContractError):
        evolve(params, coherent_state(J1, 1.0, 0.0), -1)
