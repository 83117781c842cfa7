"""Mechanical checks of the periodicities and symmetries of the kicked top.

Every check returns a :class:`PeriodicityCheck`; a failed check is a result,
not an exception.  Suites bundle checks, optionally run them in worker
processes, and always return results in declaration order.
"""

from __future__ import annotations

import contextlib
import inspect
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from math import gcd, pi
from typing import Optional

import numpy as np

from . import __version__, classical, reduction, spinalg
from .dynamics import (
    FloquetParams,
    RationalKick,
    build_floquet,
    closed_form_power,
    evolve,
    parity_operator,
    phase_residual,
)
from .measures import COARSE, MEASURES, CorrelationReport, DiscordSettings, pure_symmetric_concurrence, report
from .spinalg import ContractError, DickeVector, NumericalError, SpinQuantum, as_spin, coherent_state

DEFAULT_TOL = 1e-8
ENTROPY_TOL = 1e-10
MATRIX_TOL = 1e-10
ENTROPY_FIELDS = ("s_vn_1", "s_vn_2")

CONVENTIONS = {
    "entropy_units": "nats",
    "basis_ordering": "index n holds |j, j-n>, m descending",
    "qubit_basis": "set bit = down spin; two-qubit order |11>,|10>,|01>,|00>",
    "coherent_state": "exp(-i phi Jz) exp(-i theta Jy) |j,j>",
    "discord_measured_qubit": "first qubit of the pair, projective measurements",
}


@dataclass
class PeriodicityCheck:
    kind: str
    params: dict
    initial: Optional[dict]
    t_max: int
    tolerance: float
    passed: bool = False
    status: str = "fail"
    max_deviation: float = 0.0
    worst: Optional[dict] = None
    detail: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        return _json_safe(asdict(self))


def _json_safe(obj):
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _initial(theta, phi) -> dict:
    return {"theta": float(theta), "phi": float(phi)}


# report comparison


def _tol_for(name: str, tol: float, entropy_tol: Optional[float]) -> float:
    if entropy_tol is not None and name in ENTROPY_FIELDS:
        return min(tol, entropy_tol)
    return tol


@dataclass
class _Comparison:
    max_deviation: float = 0.0
    worst: Optional[dict] = None
    per_measure: dict = field(default_factory=dict)
    failing: set = field(default_factory=set)

    def add(self, t, a: CorrelationReport, b: CorrelationReport, tol, entropy_tol=None, t_other=None):
        for name in MEASURES:
            x, y = getattr(a, name), getattr(b, name)
            if x is None and y is None:
                continue
            d = math.inf if (x is None or y is None) else abs(x - y)
            self.per_measure[name] = max(self.per_measure.get(name, 0.0), d)
            if d > _tol_for(name, tol, entropy_tol):
                self.failing.add(name)
            if d > self.max_deviation or self.worst is None:
                self.max_deviation = d
                self.worst = {"t": int(t), "measure": name}
                if t_other is not None:
                    self.worst["t_other"] = int(t_other)

    def finish(self, check: PeriodicityCheck) -> PeriodicityCheck:
        check.max_deviation = self.max_deviation
        check.worst = self.worst
        check.detail["per_measure_max_deviation"] = dict(self.per_measure)
        check.passed = not self.failing
        check.status = "pass" if check.passed else "fail"
        if self.failing:
            check.detail["failing_measures"] = sorted(self.failing)
        return check


def _reports(params: FloquetParams, psi0: DickeVector, t_max: int, discord: DiscordSettings):
    rec = evolve(params, psi0, t_max)
    return [report(s, discord) for s in rec.states]


# k periodicity


def verify_k_periodicity(
    j,
    p,
    k: float,
    theta0: float,
    phi0: float,
    t_max: int,
    tol: float = DEFAULT_TOL,
    entropy_tol: Optional[float] = ENTROPY_TOL,
    discord: DiscordSettings = COARSE,
) -> PeriodicityCheck:
    """Compare evolutions at ``k`` and ``k + 2j*pi`` from the same coherent state.

    For integer j the shift multiplies the propagator by a z-parity that
    turns ``p`` into ``-p``; this is a local unitary only when ``p`` is a
    multiple of pi/2, so other ``p`` are expected to fail.
    """
    spin = as_spin(j)
    if t_max < 1:
        raise ContractError("t_max must be >= 1")
    a = FloquetParams.make(spin, k, p)
    b = a.with_k(k + spin.two_j * pi)
    check = PeriodicityCheck(
        "k-period",
        {**a.describe(), "kappa": spin.two_j * pi},
        _initial(theta0, phi0),
        t_max,
        tol,
    )
    psi0 = coherent_state(spin, theta0, phi0)
    if spin.two_j == 1:
        # single qubit: no correlations, states must agree up to a global phase
        sa, sb = evolve(a, psi0, t_max).states, evolve(b, psi0, t_max).states
        devs = [phase_residual(x.amplitudes, y.amplitudes) for x, y in zip(sa, sb)]
        worst = int(np.argmax(devs))
        check.max_deviation = float(devs[worst])
        check.worst = {"t": worst, "measure": "state-phase"}
        check.passed = check.max_deviation <= tol
        check.status = "pass" if check.passed else "fail"
        check.detail["mode"] = "global-phase"
        return check
    ra = _reports(a, psi0, t_max, discord)
    rb = _reports(b, psi0, t_max, discord)
    cmp = _Comparison()
    for t in range(1, t_max + 1):
        cmp.add(t, ra[t], rb[t], tol, entropy_tol)
    return cmp.finish(check)


# j = 1 time periodicity


def predicted_time_period(p_halfpi: int, kick: RationalKick) -> int:
    """Period in kicks of the j=1 correlations for ``p = p_halfpi * pi/2``, ``k = r pi/s``."""
    if p_halfpi not in (0, 1, 2, 3, 4):
        raise ContractError(f"time period known only for p in {{0, pi/2, pi, 3pi/2, 2pi}}, got {p_halfpi}*pi/2")
    odd = kick.r % 2 == 1
    if p_halfpi in (1, 3):
        return 4 * kick.s if odd else 2 * kick.s
    return 2 * kick.s if odd else kick.s


def expected_period_matrix(p_halfpi: int, kick: RationalKick) -> Optional[np.ndarray]:
    """Closed-form ``U^T`` for p = pi/2 and p = pi; ``None`` for other p."""
    r = kick.r
    swap = np.array([[0, 0, 1], [0, -1, 0], [1, 0, 0]], dtype=complex)
    if p_halfpi == 1:
        if r % 2 == 1:
            return swap
        sign = (-1) ** (r // 2)
        return np.array(
            [[(1 - sign) / 2, 0, (1 + sign) / 2], [0, -sign, 0], [(1 + sign) / 2, 0, (1 - sign) / 2]],
            dtype=complex,
        )
    if p_halfpi == 2:
        if r % 2 == 1:
            return np.diag([-1, 1, -1]).astype(complex)
        ir = 1j**r
        return np.array([[0, 0, ir], [0, -1, 0], [ir, 0, 0]], dtype=complex)
    return None


# matrices acting on the j=1 Dicke space as a product of identical single-qubit Paulis
LU_TRIVIAL = {
    "identity": np.eye(3, dtype=complex),
    "sz.sz": np.diag([-1, 1, -1]).astype(complex),
    "sx.sx": np.array([[0, 0, 1], [0, 1, 0], [1, 0, 0]], dtype=complex),
    "(sz.sz)(sx.sx)": np.array([[0, 0, 1], [0, -1, 0], [1, 0, 0]], dtype=complex),
}


def lu_class(m: np.ndarray, tol: float = MATRIX_TOL) -> Optional[str]:
    """Name of the local-unitary matrix equal to ``m`` up to a global phase, if any."""
    for name, ref in LU_TRIVIAL.items():
        i = np.unravel_index(np.argmax(np.abs(ref)), ref.shape)
        if abs(m[i]) < 0.5:
            continue
        phase = m[i] / ref[i]
        if np.max(np.abs(m - phase * ref)) < tol:
            return name
    return None


def verify_time_periodicity(
    p,
    kick: RationalKick,
    theta0: float,
    phi0: float,
    cycles: int = 1,
    tol: float = DEFAULT_TOL,
    j=1,
    discord: DiscordSettings = COARSE,
) -> PeriodicityCheck:
    """Report(t) = report(t + T) for t = 0..cycles*T, plus the matrix form of ``U^T``."""
    spin = as_spin(j)
    if spin.two_j != 2:
        raise ContractError("time periodicity is a j = 1 result")
    params = FloquetParams.make(spin, kick.k, p)
    if params.p_halfpi is None:
        raise ContractError(f"p must be a symbolic multiple of pi/2, got {p!r}")
    period = predicted_time_period(params.p_halfpi, kick)
    t_max = (cycles + 1) * period
    check = PeriodicityCheck(
        "time-period",
        {**params.describe(), "r": kick.r, "s": kick.s, "T": period},
        _initial(theta0, phi0),
        t_max,
        tol,
    )
    u = build_floquet(params)
    u_t = np.linalg.matrix_power(u, period)
    check.detail["U^T_lu_class"] = lu_class(u_t)
    matrix_ok = check.detail["U^T_lu_class"] is not None
    matrix_dev = 0.0 if matrix_ok else math.inf
    expected = expected_period_matrix(params.p_halfpi, kick)
    if expected is not None:
        cf = closed_form_power(kick.k, params.p_halfpi, period)
        dev_num = float(np.max(np.abs(u_t - expected)))
        dev_cf = float(np.max(np.abs(cf - expected)))
        check.detail["U^T_vs_closed_form_matrix"] = dev_num
        check.detail["closed_form_power_vs_matrix"] = dev_cf
        # the period matrices are real, so they cannot see the sign of k; every power can
        dev_steps, un = 0.0, np.eye(3, dtype=complex)
        for n in range(1, period + 1):
            un = u @ un
            dev_steps = max(dev_steps, float(np.max(np.abs(un - closed_form_power(kick.k, params.p_halfpi, n)))))
        check.detail["U^n_vs_closed_form_power"] = dev_steps
        matrix_dev = max(matrix_dev, dev_num, dev_cf, dev_steps)
        matrix_ok = matrix_ok and matrix_dev < MATRIX_TOL
    check.detail["matrix_check_passed"] = matrix_ok
    reps = _reports(params, coherent_state(spin, theta0, phi0), t_max, discord)
    cmp = _Comparison()
    for t in range(cycles * period + 1):
        cmp.add(t, reps[t], reps[t + period], tol, t_other=t + period)
    cmp.finish(check)
    if not matrix_ok:
        check.passed = False
        check.status = "fail"
        check.detail.setdefault("failing_measures", []).append("U^T matrix")
        if matrix_dev > check.max_deviation:
            check.max_deviation = matrix_dev
            check.worst = {"t": period, "measure": "U^T matrix"}
    return check


# p = pi mirror identities


def mirror_pairs(kick: RationalKick) -> tuple[str, list]:
    r, s = kick.r, kick.s
    if r % 2 == 1:
        return "mirror-A", [(s + l, s - l) for l in range(1, s)]
    return "mirror-B", [((s - 2 * l - 1) // 2, (s + 2 * l + 1) // 2) for l in range(1, (s - 3) // 2 + 1)]


def verify_mirror_identities(
    kick: RationalKick,
    theta0: float,
    phi0: float,
    tol: float = DEFAULT_TOL,
    p="pi",
    discord: DiscordSettings = COARSE,
) -> PeriodicityCheck:
    """Equal correlations at the mirrored times around ``s`` (odd r) or ``s/2`` (even r)."""
    params = FloquetParams.make(SpinQuantum(2), kick.k, p)
    if params.p_halfpi != 2:
        raise ContractError("mirror identities are stated for p = pi")
    psi0 = coherent_state(params.spin, theta0, phi0)
    return _mirror_check(params, kick, psi0, tol, discord, _initial(theta0, phi0))


def verify_mirror_identities_state(kick: RationalKick, psi0: DickeVector, tol=DEFAULT_TOL, discord=COARSE):
    """Same as :func:`verify_mirror_identities` for an explicit j=1 initial state."""
    if psi0.two_j != 2:
        raise ContractError("mirror identities need j = 1")
    params = FloquetParams.make(psi0.spin, kick.k, "pi")
    return _mirror_check(params, kick, psi0, tol, discord, None)


def _mirror_check(params, kick, psi0, tol, discord, initial):
    a, b, c = psi0.amplitudes
    if pure_symmetric_concurrence(a, b, c) > 1e-12:
        raise ContractError("mirror identities need a separable initial state (ac = b^2/2)")
    kind, pairs = mirror_pairs(kick)
    t_max = max((max(x) for x in pairs), default=0)
    check = PeriodicityCheck(kind, {**params.describe(), "r": kick.r, "s": kick.s}, initial, t_max, tol)
    check.detail["pairs"] = [list(x) for x in pairs]
    if not pairs:
        check.passed, check.status = True, "pass"
        check.detail["vacuous"] = True
        return check
    reps = _reports(params, psi0, t_max, discord)
    cmp = _Comparison()
    for t1, t2 in pairs:
        cmp.add(t1, reps[t1], reps[t2], tol, t_other=t2)
    cmp.finish(check)
    if not check.passed and "concurrence" not in cmp.failing:
        check.status = "partial"
    return check


# reflection about j*pi


def reflection_candidates(theta0: float, phi0: float) -> dict:
    w = spinalg.wrap_phi
    return {
        "theta->pi-theta": (pi - theta0, w(phi0)),
        "theta->pi-theta, phi->pi-phi": (pi - theta0, w(pi - phi0)),
        "theta->pi-theta, phi->phi+pi": (pi - theta0, w(phi0 + pi)),
        "phi->-phi": (theta0, w(-phi0)),
    }


def verify_reflection(
    j,
    p,
    k1: float,
    theta0: float,
    phi0: float,
    t_max: int,
    tol: float = DEFAULT_TOL,
    discord: DiscordSettings = COARSE,
) -> PeriodicityCheck:
    """Find which transforms of the initial state map evolution at ``k1`` onto ``2j*pi - k1``."""
    spin = as_spin(j)
    if not (0 <= k1 <= spin.j * pi + 1e-12):
        raise ContractError(f"k1 must lie in [0, j*pi], got {k1}")
    k2 = spin.two_j * pi - k1
    base = FloquetParams.make(spin, k1, p)
    mirrored = base.with_k(k2)
    check = PeriodicityCheck(
        "reflection",
        {**base.describe(), "k2": k2},
        _initial(theta0, phi0),
        t_max,
        tol,
    )
    ref = _reports(base, coherent_state(spin, theta0, phi0), t_max, discord)
    outcomes = {}
    best = None
    for name, (th, ph) in reflection_candidates(theta0, phi0).items():
        reps = _reports(mirrored, coherent_state(spin, th, ph), t_max, discord)
        cmp = _Comparison()
        for t in range(t_max + 1):
            cmp.add(t, ref[t], reps[t], tol)
        outcomes[name] = {
            "passed": not cmp.failing,
            "max_deviation": cmp.max_deviation,
            "worst": cmp.worst,
            "initial": _initial(th, ph),
        }
        if best is None or cmp.max_deviation < best[1].max_deviation:
            best = (name, cmp)
    passing = [n for n, o in outcomes.items() if o["passed"]]
    check.detail["candidates"] = outcomes
    check.detail["passing_transforms"] = passing
    check.detail["chosen_transform"] = passing[0] if passing else None
    check.max_deviation = best[1].max_deviation
    check.worst = best[1].worst
    check.passed = bool(passing)
    check.status = "pass" if passing else "fail"
    return check


def k_max(j) -> float:
    """Largest kick strength with distinct phase-space signatures: ``j*pi``."""
    return as_spin(j).j * pi


def experiment_window(tau_coh: float, period: int) -> float:
    if tau_coh <= 0:
        raise ContractError("coherence time must be positive")
    return min(tau_coh, period)


# parity acting as a local unitary, checked in the full qubit space


def verify_lu_equivalence(j, n_states: int = 100, seed: int = 0, tol: float = 1e-12) -> PeriodicityCheck:
    """``exp(-i pi Jz^2)`` versus sigma_z on every qubit, in the ``2**(2j)`` qubit space.

    Half-integer j: the parity operator is a global phase, so the partner is
    the identity.
    """
    spin = as_spin(j)
    rng = np.random.default_rng(seed)
    nq = spin.two_j
    popcount = np.array([bin(i).count("1") for i in range(2**nq)])
    sz_all = (-1.0) ** popcount
    par = parity_operator(spin)
    check = PeriodicityCheck(
        "lu-equivalence", {"j": str(spin), "n_states": n_states, "seed": seed}, None, 0, tol
    )
    worst, where = 0.0, 0
    for i in range(n_states):
        psi = DickeVector.random(spin, rng)
        lhs = reduction.expand_to_qubits(DickeVector(spin, par @ psi.amplitudes)).amplitudes
        full = reduction.expand_to_qubits(psi).amplitudes
        rhs = sz_all * full if spin.is_integer else full
        d = phase_residual(lhs, rhs)
        if d > worst:
            worst, where = d, i
    check.detail["local_unitary"] = "sigma_z on every qubit" if spin.is_integer else "identity (global phase)"
    check.max_deviation = worst
    check.worst = {"t": 0, "measure": f"state {where}"}
    check.passed = worst < tol
    check.status = "pass" if check.passed else "fail"
    return check


# classical map


def verify_classical(n_samples: int = 10_000, seed: int = 0, tol: float = 1e-14, special_tol: float = 1e-12):
    """Inversion conjugacy, reduced maps and the p = 3pi/2 reflection on random points."""
    rng = np.random.default_rng(seed)
    checks = []
    pts = classical.initial_conditions(n_samples, seed)
    ks = rng.uniform(-10, 10, n_samples)
    ps = rng.uniform(-2 * pi, 2 * pi, n_samples)
    for label, pvals in (("random p", ps), ("p=pi/2", np.full(n_samples, pi / 2)),
                         ("p=pi", np.full(n_samples, pi)), ("p=2pi", np.full(n_samples, 2 * pi))):
        worst, where = 0.0, 0
        for i in range(n_samples):
            v = classical.SpherePoint(*pts[i])
            d = classical.inversion_conjugacy_check(v, ks[i], pvals[i])
            if d > worst:
                worst, where = d, i
        c = PeriodicityCheck("classical-conjugacy", {"p": label, "n_samples": n_samples, "seed": seed}, None, 1, tol)
        c.max_deviation, c.worst = worst, {"t": 1, "measure": f"sample {where}"}
        c.passed = worst < tol
        c.status = "pass" if c.passed else "fail"
        checks.append(c)
    for which, pval in (("pi/2", pi / 2), ("pi", pi), ("2pi", 2 * pi)):
        worst = 0.0
        for i in range(min(n_samples, 1000)):
            v = classical.SpherePoint(*pts[i])
            a = classical.map_step(v, ks[i], pval).as_array()
            b = classical.map_step_special(v, ks[i], which).as_array()
            worst = max(worst, float(np.max(np.abs(a - b))))
        c = PeriodicityCheck("classical-special-map", {"p": which, "n_samples": min(n_samples, 1000)}, None, 1, special_tol)
        c.max_deviation, c.worst = worst, {"t": 1, "measure": "XYZ"}
        c.passed = worst < special_tol
        c.status = "pass" if c.passed else "fail"
        checks.append(c)
    flip = np.array([-1.0, 1.0, -1.0])
    worst = 0.0
    for i in range(min(n_samples, 1000)):
        v = classical.SpherePoint(*pts[i])
        a = classical.map_step(v, ks[i], 3 * pi / 2).as_array()
        b = flip * classical.map_step(v, ks[i], pi / 2).as_array()
        worst = max(worst, float(np.max(np.abs(a - b))))
    c = PeriodicityCheck("classical-3pi/2-reflection", {"n_samples": min(n_samples, 1000)}, None, 1, special_tol)
    c.max_deviation, c.worst = worst, {"t": 1, "measure": "XYZ"}
    c.passed = worst < special_tol
    c.status = "pass" if c.passed else "fail"
    checks.append(c)
    return checks


# optional scan for time periods at j > 1


def scan_time_periods(j, p, k: float, theta0: float, phi0: float, max_period: int = 1000, tol: float = 1e-8):
    """Candidate periods ``T <= max_period`` of the single-qubit entropy series.

    Reports what it finds and asserts nothing.
    """
    spin = as_spin(j)
    params = FloquetParams.make(spin, k, p)
    rec = evolve(params, coherent_state(spin, theta0, phi0), 2 * max_period)
    series = np.array([report(s, measures=("s_vn_1",)).s_vn_1 for s in rec.states])
    found = []
    for period in range(1, max_period + 1):
        if np.max(np.abs(series[: max_period + 1] - series[period : period + max_period + 1])) < tol:
            found.append(period)
    return {"j": str(spin), "k": k, "p": params.p, "max_period": max_period, "periods": found}


# suites


def _coherent_angles(rng) -> tuple[float, float]:
    theta = float(np.arccos(rng.uniform(-1, 1)))
    phi = spinalg.wrap_phi(float(rng.uniform(-pi, pi)))
    return theta, phi


def k_period_tasks(js=("1/2", "1", "3/2", "2", "5/2", "3"), n_random: int = 20, t_max: int = 50, seed: int = 2024, p="pi/2"):
    tasks = []
    for jtext in js:
        spin = SpinQuantum.parse(jtext)
        rng = np.random.default_rng([seed, spin.two_j])
        for _ in range(n_random):
            k = float(rng.uniform(0, spin.two_j * pi))
            theta, phi = _coherent_angles(rng)
            tasks.append((verify_k_periodicity, dict(j=jtext, p=p, k=k, theta0=theta, phi0=phi, t_max=t_max)))
    return tasks


def reduced_kicks(s_max: int, r_per_s: int = 2):
    """All ``r/s`` in lowest terms with ``s <= s_max`` and ``1 <= r <= r_per_s * s``."""
    for s in range(1, s_max + 1):
        for r in range(1, r_per_s * s + 1):
            if gcd(r, s) == 1:
                yield RationalKick(r, s)


def time_period_tasks(s_max: int = 12, cycles: int = 1, seed: int = 7):
    rng = np.random.default_rng(seed)
    tasks = []
    for p in ("0", "pi/2", "pi", "3pi/2", "2pi"):
        for kick in reduced_kicks(s_max):
            theta, phi = _coherent_angles(rng)
            tasks.append((verify_time_periodicity, dict(p=p, kick=kick, theta0=theta, phi0=phi, cycles=cycles)))
    return tasks


def mirror_tasks(s_max: int = 11, seed: int = 11):
    rng = np.random.default_rng(seed)
    tasks = []
    for s in range(1, s_max + 1):
        for r in range(1, 2 * s + 1):
            if gcd(r, s) != 1:
                continue
            for theta, phi in ((2.5, 1.1), _coherent_angles(rng)):
                tasks.append((verify_mirror_identities, dict(kick=RationalKick(r, s), theta0=theta, phi0=phi)))
    return tasks


def reflection_tasks(js=("1", "3/2"), k1s=(0.5, 1.0, 2.0), t_max: int = 50, theta0=2.5, phi0=1.1, p="pi/2"):
    return [
        (verify_reflection, dict(j=jt, p=p, k1=k1, theta0=theta0, phi0=phi0, t_max=t_max))
        for jt in js
        for k1 in k1s
    ]


def lu_tasks(js=("1/2", "1", "3/2", "2", "5/2", "3"), n_states: int = 100):
    return [(verify_lu_equivalence, dict(j=jt, n_states=n_states, seed=i)) for i, jt in enumerate(js)]


def classical_tasks(n_samples: int = 10_000):
    return [(verify_classical, dict(n_samples=n_samples))]


SUITES = {
    "k-period": k_period_tasks,
    "time-period": time_period_tasks,
    "mirrors": mirror_tasks,
    "reflection": reflection_tasks,
    "lu": lu_tasks,
    "classical": classical_tasks,
}
SUITE_NAMES = tuple(SUITES) + ("all",)


def _run_task(task):
    fn, kwargs = task
    try:
        out = fn(**kwargs)
    except (ContractError, NumericalError, ValueError, np.linalg.LinAlgError) as exc:
        c = PeriodicityCheck(fn.__name__, _json_safe({k: str(v) for k, v in kwargs.items()}), None, 0, 0.0)
        c.status = "error"
        c.detail["error"] = f"{type(exc).__name__}: {exc}"
        c.detail["numerical"] = isinstance(exc, (NumericalError, np.linalg.LinAlgError))
        return [c]
    return out if isinstance(out, list) else [out]


def run_tasks(tasks, workers: int = 1) -> list:
    """Run check tasks; results keep declaration order whatever the worker count."""
    if workers <= 1:
        results = [_run_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_task, tasks))
    return [c for group in results for c in group]


def run_suite(name: str, workers: int = 1, discord: Optional[DiscordSettings] = None, **overrides) -> list:
    """Run a named suite; ``discord`` replaces the coarse preset wherever a check uses discord."""
    if name == "all":
        out = []
        for key in SUITES:
            out += run_suite(key, workers, discord)
        return out
    if name not in SUITES:
        raise ContractError(f"unknown suite {name!r}; choose from {', '.join(SUITE_NAMES)}")
    tasks = SUITES[name](**overrides)
    if discord is not None:
        tasks = [
            (fn, {**kw, "discord": discord}) if "discord" in inspect.signature(fn).parameters else (fn, kw)
            for fn, kw in tasks
        ]
    return run_tasks(tasks, workers)


def suite_report(checks, suite: str, extra_meta: Optional[dict] = None) -> dict:
    meta = {
        "tool": "kickedtop",
        "version": __version__,
        "suite": suite,
        "conventions": CONVENTIONS,
        "n_checks": len(checks),
        "n_passed": sum(c.passed for c in checks),
    }
    if extra_meta:
        meta.update(extra_meta)
    return {"metadata": _json_safe(meta), "checks": [c.to_record() for c in checks]}


def write_report(path, checks, suite: str, extra_meta=None) -> None:
    with open(path, "w") as fh:
        json.dump(suite_report(checks, suite, extra_meta), fh, indent=2)
        fh.write("\n")


# mutation injection for sensitivity testing


def _flipped_torsion(j, k):
    spin = as_spin(j)
    m = spin.m_values()
    return np.diag(np.exp(+1j * (k / spin.two_j) * m * m))


def _skewed_binomial(n, r):
    value = _ORIGINAL_BINOMIAL(n, r)
    return value + 1 if (r == 1 and n >= 2) else value


_ORIGINAL_BINOMIAL = spinalg.binomial
MUTATIONS = {
    "torsion-sign": ("torsion_exp", _flipped_torsion),
    "binomial-weight": ("binomial", _skewed_binomial),
}


@contextlib.contextmanager
def mutation(name: Optional[str]):
    """Temporarily corrupt one building block of the simulator."""
    if name is None:
        yield
        return
    if name not in MUTATIONS:
        raise ContractError(f"unknown mutation {name!r}; choose from {', '.join(MUTATIONS)}")
    attr, replacement = MUTATIONS[name]
    original = getattr(spinalg, attr)
    setattr(spinalg, attr, replacement)
    reduction._split_weights.cache_clear()
    try:
        yield
    finally:
        setattr(spinalg, attr, original)
        reduction._split_weights.cache_clear()
