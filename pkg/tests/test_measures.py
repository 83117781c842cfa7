import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from kickedtop.measures import (
    COARSE,
    FINE,
    CorrelationReport,
    DiscordSettings,
    MeasurementSetting,
    applicable_measures,
    concurrence,
    concurrence_direct,
    measured_conditional_entropy,
    nelder_mead_2d,
    pauli_correlations,
    PAULI,
    pure_symmetric_concurrence,
    q_measure,
    quantum_discord,
    quantum_discord_details,
    report,
    schmidt_decompose,
    three_tangle,
    von_neumann_entropy,
)
from kickedtop.reduction import dicke_rdm, expand_to_qubits
from kickedtop.spinalg import ContractError, DickeVector, SpinQuantum, coherent_state

LN2 = np.log(2)
J1, J32 = SpinQuantum(2), SpinQuantum(3)
GHZ = DickeVector(J32, np.array([1, 0, 0, 1]) / np.sqrt(2))


def ket(bits):
    v = np.zeros(4)
    v[int(bits, 2)] = 1
    return v


def random_mixed(rng, rank=None):
    rank = rank or int(rng.integers(1, 5))
    g = rng.normal(size=(4, rank)) + 1j * rng.normal(size=(4, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def test_entropy_examples():
    assert von_neumann_entropy(np.diag([1.0, 0])) == 0.0
    assert von_neumann_entropy(np.eye(2) / 2) == pytest.approx(LN2, abs=1e-15)
    assert von_neumann_entropy(np.eye(3) / 3) == pytest.approx(np.log(3), abs=1e-14)
    with pytest.raises(ContractError):
        von_neumann_entropy(np.eye(2))


def test_schmidt(rng):
    prod = expand_to_qubits(coherent_state(SpinQuantum(4), 1.0, 0.4))
    assert_allclose(schmidt_decompose(prod, [0]), [1, 0], atol=1e-12)
    bell = expand_to_qubits(DickeVector.basis(J1, 1))
    assert_allclose(schmidt_decompose(bell, [0]), [0.5, 0.5], atol=1e-15)
    full = expand_to_qubits(DickeVector.random(SpinQuantum(4), rng))
    lam = schmidt_decompose(full, [0])
    from kickedtop.reduction import brute_force_rdm

    s_a = von_neumann_entropy(brute_force_rdm(full, [0]))
    s_b = von_neumann_entropy(brute_force_rdm(full, [1, 2, 3]))
    s_l = -np.sum(lam[lam > 0] * np.log(lam[lam > 0]))
    assert abs(s_a - s_b) < 1e-10 and abs(s_a - s_l) < 1e-10


def test_concurrence_examples():
    bell = (ket("00") + ket("11")) / np.sqrt(2)
    assert concurrence(np.outer(bell, bell)) == pytest.approx(1.0, abs=1e-12)
    assert concurrence(np.outer(ket("01"), ket("01"))) == pytest.approx(0.0, abs=1e-12)
    w = (ket("01") + ket("10")) / np.sqrt(2)
    assert concurrence(np.outer(w, w)) == pytest.approx(1.0, abs=1e-12)
    assert pure_symmetric_concurrence(0, 1, 0) == 1.0


def test_pure_symmetric_concurrence_examples():
    assert pure_symmetric_concurrence(0.5, 2**-0.5, 0.5) == pytest.approx(0.0, abs=1e-15)
    assert pure_symmetric_concurrence(2**-0.5, 0, 2**-0.5) == pytest.approx(1.0)
    ghz2 = (ket("00") + ket("11")) / np.sqrt(2)
    assert concurrence(np.outer(ghz2, ghz2)) == pytest.approx(1.0, abs=1e-12)


def test_concurrence_routes_agree(rng):
    for _ in range(200):
        rho = random_mixed(rng)
        c1, c2 = concurrence(rho), concurrence_direct(rho)
        assert 0 <= c1 <= 1
        assert abs(c1 - c2) < 1e-7


def test_werner_concurrence():
    bell = (ket("00") + ket("11")) / np.sqrt(2)
    for f in np.linspace(0, 1, 11):
        rho = f * np.outer(bell, bell) + (1 - f) * np.eye(4) / 4
        assert concurrence(rho) == pytest.approx(max(0.0, (3 * f - 1) / 2), abs=1e-7)


def test_three_tangle_examples():
    assert three_tangle(GHZ) == pytest.approx(1.0, abs=1e-12)
    assert three_tangle(DickeVector.basis(J32, 1)) == pytest.approx(0.0, abs=1e-12)
    assert three_tangle(DickeVector.basis(J32, 0)) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ContractError):
        three_tangle(DickeVector.basis(J1, 0))


def test_q_measure_examples():
    assert q_measure(coherent_state(SpinQuantum(6), 1.2, -0.7)) == pytest.approx(0.0, abs=1e-12)
    assert q_measure(DickeVector.basis(J1, 1)) == pytest.approx(1.0, abs=1e-12)
    assert q_measure(GHZ) == pytest.approx(1.0, abs=1e-12)


def test_pauli_correlations_explicit(rng):
    rho = random_mixed(rng)
    t = pauli_correlations(rho)
    for m in range(4):
        for n in range(4):
            assert abs(t[m, n] - np.trace(rho @ np.kron(PAULI[m], PAULI[n])).real) < 1e-14


def test_conditional_entropy_routes(rng):
    from kickedtop.measures import _ConditionalEntropy

    rho = random_mixed(rng)
    f = _ConditionalEntropy(rho)
    for th, ph in rng.uniform([0, -np.pi], [np.pi, np.pi], size=(20, 2)):
        assert abs(f([th, ph]) - measured_conditional_entropy(rho, MeasurementSetting(th, ph))) < 1e-12


def test_nelder_mead_quadratic():
    f = lambda x: (x[0] - 0.3) ** 2 + 2 * (x[1] + 0.1) ** 2
    x, fx, ok = nelder_mead_2d(f, np.array([[0, 0], [0.1, 0], [0, 0.1]], float), 1e-10, 1e-16, 2000)
    assert ok
    assert_allclose(x, [0.3, -0.1], atol=1e-8)


def test_discord_examples():
    psi = ket("01") / 1.0
    w = (ket("01") + ket("10")) / np.sqrt(2)
    assert quantum_discord(np.outer(w, w)) == pytest.approx(LN2, abs=1e-7)
    assert quantum_discord(np.outer(psi, psi)) == pytest.approx(0.0, abs=1e-7)
    cc = (np.outer(ket("00"), ket("00")) + np.outer(ket("11"), ket("11"))) / 2
    assert abs(quantum_discord(cc)) < 1e-6


def test_discord_classical_state_brute_grid():
    # brute 512 x 1024 grid of measurement directions reaches 0 on the z axis
    cc = (np.outer(ket("00"), ket("00")) + np.outer(ket("11"), ket("11"))) / 2
    from kickedtop.measures import _ConditionalEntropy

    f = _ConditionalEntropy(cc)
    th = (np.arange(512) + 0.5) * np.pi / 512
    ph = -np.pi + (np.arange(1024) + 0.5) * 2 * np.pi / 1024
    tt, pp = np.meshgrid(np.concatenate([[0.0], th]), ph, indexing="ij")
    n = np.stack([np.sin(tt) * np.cos(pp), np.sin(tt) * np.sin(pp), np.cos(tt)], axis=-1).reshape(-1, 3)
    best = f.on_grid(n).min()
    # mutual information ln 2, all of it reachable by measuring sigma_z
    mutual = 2 * LN2 - von_neumann_entropy(cc)
    assert abs(mutual - (LN2 - best)) < 1e-6
    assert quantum_discord(cc) < 1e-6


def test_discord_pure_state_equals_entropy(rng):
    for _ in range(30):
        psi = DickeVector.random(J1, rng)
        rho4 = np.outer(expand_to_qubits(psi).amplitudes, expand_to_qubits(psi).amplitudes.conj())
        s = von_neumann_entropy(dicke_rdm(psi, 1))
        assert abs(quantum_discord(rho4) - s) < 1e-6


def test_discord_nonnegative_mixed(rng):
    for _ in range(50):
        assert quantum_discord(random_mixed(rng), COARSE) >= -1e-7


def test_discord_details_and_settings():
    w = (ket("01") + ket("10")) / np.sqrt(2)
    det = quantum_discord_details(np.outer(w, w))
    assert 0 <= det.setting.theta <= np.pi
    assert isinstance(det.value, float)
    th, ph = DiscordSettings(n_theta=4, n_phi=8).grid()
    assert th.shape == (4,) and ph.shape == (8,)
    assert th.min() > 0 and th.max() < np.pi / 2


def test_report_examples():
    rep = report(GHZ)
    assert rep.s_vn_1 == pytest.approx(LN2, abs=1e-12)
    assert rep.concurrence == pytest.approx(0.0, abs=1e-12)
    assert rep.three_tangle == pytest.approx(1.0, abs=1e-12)
    assert rep.q_measure == pytest.approx(1.0, abs=1e-12)
    assert set(rep.present()) == set(applicable_measures(3))
    two = report(coherent_state(J1, 1.0, 0.2))
    assert two.s_vn_2 is None and two.three_tangle is None
    with pytest.raises(ContractError):
        report(DickeVector.basis(SpinQuantum(1), 0))


def test_report_pure_two_qubit_discord(rng):
    for _ in range(20):
        rep = report(DickeVector.random(J1, rng), FINE)
        assert abs(rep.discord - rep.s_vn_1) < 1e-6


def test_report_max_deviation():
    a = CorrelationReport(s_vn_1=0.2, concurrence=0.1)
    b = CorrelationReport(s_vn_1=0.25, concurrence=0.1)
    dev, name = a.max_deviation(b)
    assert name == "s_vn_1" and dev == pytest.approx(0.05)
    dev, _ = a.max_deviation(CorrelationReport(s_vn_1=0.2))
    assert dev == np.inf


@given(st.integers(2, 10), st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_report_ranges(two_j, seed):
    rep = report(DickeVector.random(SpinQuantum(two_j), np.random.default_rng(seed)), COARSE)
    for name, v in rep.present().items():
        assert v >= -1e-7, name
    assert rep.s_vn_1 <= LN2 + 1e-12
    assert rep.concurrence <= 1 + 1e-12 and rep.q_measure <= 1
