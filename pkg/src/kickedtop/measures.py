"""Quantum-correlation measures for states of the kicked top.

All entropies are in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Optional

import numpy as np

from .reduction import (
    QUBIT,
    QubitExpansion,
    ReducedDensityMatrix,
    check_density_matrix,
    clamp_spectrum,
    dicke_block_factor,
    dicke_embedding,
    dicke_rdm,
)
from .spinalg import ContractError, DickeVector, NumericalError

PAULI = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)
SIGMA_YY = np.kron(PAULI[2], PAULI[2])

DISCORD_CLAMP = 1e-7


def _as_matrix(rho) -> np.ndarray:
    if isinstance(rho, ReducedDensityMatrix):
        return rho.entries
    return np.asarray(rho, dtype=complex)


def entropy_from_spectrum(vals) -> float:
    vals = np.asarray(vals, dtype=float)
    vals = vals[vals > 0]
    return float(-np.sum(vals * np.log(vals))) if vals.size else 0.0


def von_neumann_entropy(rho) -> float:
    """``-Tr rho ln rho``; eigenvalues in ``[-1e-10, 0)`` are treated as zero."""
    m = _as_matrix(rho)
    tr = np.trace(m).real
    if abs(tr - 1.0) > 1e-8:
        raise ContractError(f"density matrix trace {tr:.12g} is not 1")
    vals = clamp_spectrum(np.linalg.eigvalsh((m + m.conj().T) / 2))
    return entropy_from_spectrum(vals)


def schmidt_decompose(psi: QubitExpansion, keep) -> np.ndarray:
    """Schmidt coefficients squared, descending, for the split ``keep | rest``."""
    keep = sorted(set(int(i) for i in keep))
    nq = psi.n_qubits
    rest = [i for i in range(nq) if i not in keep]
    if not keep or not rest or keep[0] < 0 or keep[-1] >= nq:
        raise ContractError(f"split {keep} does not leave both sides non-empty for {nq} qubits")
    m = np.transpose(psi.tensor(), keep + rest).reshape(2 ** len(keep), -1)
    sv = np.linalg.svd(m, compute_uv=False)
    return sv**2


# concurrence


def spin_flip(rho4: np.ndarray) -> np.ndarray:
    return SIGMA_YY @ rho4.conj() @ SIGMA_YY


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh((m + m.conj().T) / 2)
    vals = np.sqrt(np.clip(vals, 0.0, None))
    return (vecs * vals) @ vecs.conj().T


def _check_two_qubit(rho4, tol=1e-10) -> np.ndarray:
    m = _as_matrix(rho4)
    if isinstance(rho4, ReducedDensityMatrix) and rho4.basis != QUBIT:
        raise ContractError("two-qubit measures need a standard-qubit-basis 4x4 matrix")
    if m.shape != (4, 4):
        raise ContractError(f"expected a 4x4 density matrix, got {m.shape}")
    check_density_matrix(m, tol)
    return m


def _wootters_singular_values(w: np.ndarray) -> np.ndarray:
    """Descending ``sqrt(lambda_i)`` of ``rho rho~`` for ``rho = w w^dagger``.

    The ``lambda_i`` are the squared singular values of ``w^T (sy x sy) w``,
    which sidesteps square roots of round-off-sized eigenvalues.
    """
    s = np.linalg.svd(w.T @ SIGMA_YY @ w, compute_uv=False)
    out = np.zeros(max(4, s.size))
    out[: s.size] = s
    return np.sort(out)[::-1]


def _from_singular_values(s: np.ndarray) -> float:
    return float(max(0.0, s[0] - s[1] - s[2] - s[3]))


def concurrence(rho4) -> float:
    """Wootters concurrence via the Hermitian matrix ``R = sqrt(sqrt(rho) rho~ sqrt(rho))``.

    The eigenvalues of ``R`` are taken as the singular values of
    ``sqrt(rho) (sy x sy) sqrt(rho)^T``, whose product with its adjoint is ``R^2``.
    """
    m = _check_two_qubit(rho4)
    return _from_singular_values(_wootters_singular_values(_psd_sqrt(m)))


def concurrence_from_factor(w: np.ndarray) -> float:
    """Concurrence of ``rho = w w^dagger`` for a 4-row factor ``w``."""
    w = np.asarray(w, dtype=complex)
    if w.shape[0] != 4:
        raise ContractError(f"factor must have 4 rows, got {w.shape}")
    return _from_singular_values(_wootters_singular_values(w))


def concurrence_direct(rho4) -> float:
    """Concurrence from the (non-Hermitian) eigenvalues of ``rho rho~``."""
    m = _check_two_qubit(rho4)
    lam = np.linalg.eigvals(m @ spin_flip(m)).real
    s = np.sort(np.sqrt(np.clip(lam, 0.0, None)))[::-1]
    return float(max(0.0, s[0] - s[1] - s[2] - s[3]))


def pure_symmetric_concurrence(a, b, c) -> float:
    """Concurrence of ``a|11> + b|1,0> + c|00>`` (``|1,0>`` the two-qubit triplet)."""
    return float(2 * abs(b * b / 2 - a * c))


def three_tangle(psi: DickeVector) -> float:
    if psi.two_j != 3:
        raise ContractError(f"three-tangle needs 2j = 3, got 2j = {psi.two_j}")
    rho1 = dicke_rdm(psi, 1).entries
    c_1_23_sq = 4 * np.linalg.det(rho1).real
    c12 = concurrence_from_factor(dicke_embedding(2) @ dicke_block_factor(psi, 2))
    # C13 equals C12 by exchange symmetry
    tau = c_1_23_sq - 2 * c12**2
    return float(min(1.0, max(0.0, tau)))


def q_measure(psi: DickeVector) -> float:
    """Meyer-Wallach Q; all single-qubit purities coincide for symmetric states."""
    if psi.two_j < 2:
        raise ContractError("Q measure needs at least two qubits")
    rho1 = dicke_rdm(psi, 1)
    return float(min(1.0, max(0.0, 2 * (1 - rho1.purity()))))


# discord


@dataclass(frozen=True)
class MeasurementSetting:
    """Projective measurement along the Bloch direction ``(theta, phi)``."""

    theta: float
    phi: float

    def direction(self) -> np.ndarray:
        st = math.sin(self.theta)
        return np.array([st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)])

    def projectors(self) -> tuple[np.ndarray, np.ndarray]:
        n = self.direction()
        ns = np.tensordot(n, PAULI[1:], axes=1)
        return (PAULI[0] + ns) / 2, (PAULI[0] - ns) / 2


@dataclass(frozen=True)
class DiscordSettings:
    """Grid-then-simplex minimisation of the measured conditional entropy."""

    n_theta: int = 32
    n_phi: int = 64
    n_starts: int = 3
    xatol: float = 1e-9
    fatol: float = 1e-14
    maxiter: int = 4000

    def grid(self) -> tuple[np.ndarray, np.ndarray]:
        # cell centres; symmetric under phi -> -phi and phi -> phi + pi
        th = (np.arange(self.n_theta) + 0.5) * (np.pi / 2) / self.n_theta
        ph = -np.pi + (np.arange(self.n_phi) + 0.5) * 2 * np.pi / self.n_phi
        return th, ph


FINE = DiscordSettings()
COARSE = DiscordSettings(n_theta=8, n_phi=16, n_starts=1, xatol=1e-8, fatol=1e-13)
DISCORD_PRESETS = {"fine": FINE, "coarse": COARSE}


def pauli_correlations(rho4: np.ndarray) -> np.ndarray:
    """``R[mu, nu] = Tr(rho sigma_mu (x) sigma_nu)``; qubit A is the first factor."""
    return np.einsum("abcd,mca,ndb->mn", rho4.reshape(2, 2, 2, 2), PAULI, PAULI).real


def _h2(r):
    """Entropy of a qubit whose Bloch vector has length ``r``."""
    r = np.clip(r, 0.0, 1.0)
    lp = (1 + r) / 2
    lm = (1 - r) / 2
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -np.where(lp > 0, lp * np.log(lp), 0.0) - np.where(lm > 0, lm * np.log(lm), 0.0)
    return out


class _ConditionalEntropy:
    """Average entropy of B after measuring A, as a function of the direction on A."""

    def __init__(self, rho4: np.ndarray):
        r = pauli_correlations(rho4)
        self.a = r[1:, 0]
        self.b = r[0, 1:]
        self.t = r[1:, 1:]
        self._a = tuple(self.a)
        self._b = tuple(self.b)
        self._t = tuple(tuple(row) for row in self.t)

    def on_grid(self, n: np.ndarray) -> np.ndarray:
        na = n @ self.a
        nt = n @ self.t
        total = np.zeros(n.shape[0])
        for sign in (1.0, -1.0):
            p = (1 + sign * na) / 2
            v = np.linalg.norm(self.b + sign * nt, axis=1)
            with np.errstate(divide="ignore", invalid="ignore"):
                rr = np.where(p > 0, v / (2 * p), 0.0)
            total += np.where(p > 0, p * _h2(rr), 0.0)
        return total

    def __call__(self, x) -> float:
        th, ph = x
        st = math.sin(th)
        n0, n1, n2 = st * math.cos(ph), st * math.sin(ph), math.cos(th)
        a, b, t = self._a, self._b, self._t
        na = n0 * a[0] + n1 * a[1] + n2 * a[2]
        t0 = n0 * t[0][0] + n1 * t[1][0] + n2 * t[2][0]
        t1 = n0 * t[0][1] + n1 * t[1][1] + n2 * t[2][1]
        t2 = n0 * t[0][2] + n1 * t[1][2] + n2 * t[2][2]
        total = 0.0
        for sign in (1.0, -1.0):
            p = (1 + sign * na) / 2
            if p <= 0:
                continue
            v = math.sqrt((b[0] + sign * t0) ** 2 + (b[1] + sign * t1) ** 2 + (b[2] + sign * t2) ** 2)
            rr = min(1.0, v / (2 * p))
            lp, lm = (1 + rr) / 2, (1 - rr) / 2
            h = 0.0
            if lp > 0:
                h -= lp * math.log(lp)
            if lm > 0:
                h -= lm * math.log(lm)
            total += p * h
        return total


def measured_conditional_entropy(rho4, setting: MeasurementSetting) -> float:
    """``sum_i p_i S(rho_{B|i})`` computed directly from the projectors."""
    m = _as_matrix(rho4)
    total = 0.0
    for proj in setting.projectors():
        sub = np.kron(proj, PAULI[0]) @ m
        sub = sub.reshape(2, 2, 2, 2)
        cond = np.einsum("abac->bc", sub)
        p = np.trace(cond).real
        if p > 1e-15:
            total += p * von_neumann_entropy(cond / p)
    return total


def nelder_mead_2d(f, simplex, xatol: float, fatol: float, maxiter: int):
    """Minimise ``f`` over the plane from a starting triangle.

    Standard reflect/expand/contract/shrink moves; stops once both the
    vertex spread and the value spread fall under the tolerances.
    Returns ``(x, fx, converged)``.
    """
    pts = [list(map(float, v)) for v in simplex]
    vals = [f(v) for v in pts]
    for _ in range(maxiter):
        order = sorted(range(3), key=vals.__getitem__)
        pts = [pts[i] for i in order]
        vals = [vals[i] for i in order]
        spread_x = max(abs(pts[i][c] - pts[0][c]) for i in (1, 2) for c in (0, 1))
        spread_f = max(abs(vals[1] - vals[0]), abs(vals[2] - vals[0]))
        if spread_x <= xatol and spread_f <= fatol:
            return pts[0], vals[0], True
        cx = (pts[0][0] + pts[1][0]) / 2
        cy = (pts[0][1] + pts[1][1]) / 2
        wx, wy = pts[2]
        xr = [2 * cx - wx, 2 * cy - wy]
        fr = f(xr)
        if fr < vals[0]:
            xe = [3 * cx - 2 * wx, 3 * cy - 2 * wy]
            fe = f(xe)
            pts[2], vals[2] = (xe, fe) if fe < fr else (xr, fr)
        elif fr < vals[1]:
            pts[2], vals[2] = xr, fr
        else:
            if fr < vals[2]:
                xc = [1.5 * cx - 0.5 * wx, 1.5 * cy - 0.5 * wy]
                fc = f(xc)
                accept = fc <= fr
            else:
                xc = [0.5 * cx + 0.5 * wx, 0.5 * cy + 0.5 * wy]
                fc = f(xc)
                accept = fc < vals[2]
            if accept:
                pts[2], vals[2] = xc, fc
            else:
                for i in (1, 2):
                    pts[i] = [(pts[0][c] + pts[i][c]) / 2 for c in (0, 1)]
                    vals[i] = f(pts[i])
    best = min(range(3), key=vals.__getitem__)
    return pts[best], vals[best], False


@dataclass(frozen=True)
class DiscordResult:
    value: float
    setting: MeasurementSetting
    conditional_entropy: float


def quantum_discord_details(rho4, settings: DiscordSettings = FINE) -> DiscordResult:
    m = _check_two_qubit(rho4)
    obj = _ConditionalEntropy(m)
    th, ph = settings.grid()
    tt, pp = np.meshgrid(th, ph, indexing="ij")
    st = np.sin(tt)
    n = np.stack([st * np.cos(pp), st * np.sin(pp), np.cos(tt)], axis=-1).reshape(-1, 3)
    vals = obj.on_grid(n)
    # stable sort keeps the start cells deterministic on ties
    order = np.argsort(vals, kind="stable")[: settings.n_starts]
    best_x, best_f = None, np.inf
    converged = False
    step_t = (np.pi / 2) / settings.n_theta
    step_p = 2 * np.pi / settings.n_phi
    for idx in order:
        x0 = (float(tt.reshape(-1)[idx]), float(pp.reshape(-1)[idx]))
        simplex = [x0, (x0[0] + step_t, x0[1]), (x0[0], x0[1] + step_p)]
        x, f, ok = nelder_mead_2d(obj, simplex, settings.xatol, settings.fatol, settings.maxiter)
        converged = converged or ok
        if f < best_f:
            best_f, best_x = f, x
    rho_a = np.einsum("abcb->ac", m.reshape(2, 2, 2, 2))
    value = von_neumann_entropy(rho_a) - von_neumann_entropy(m) + best_f
    setting = MeasurementSetting(float(best_x[0]), float(best_x[1]))
    if not converged:
        raise NumericalError("discord refinement did not converge", best=value)
    if value < 0:
        if value < -DISCORD_CLAMP:
            raise NumericalError(f"discord came out negative ({value:.3e})", best=value)
        value = 0.0
    return DiscordResult(value, setting, best_f)


def quantum_discord(rho4, settings: DiscordSettings = FINE) -> float:
    """Discord with projective measurements on the first qubit (nats)."""
    return quantum_discord_details(rho4, settings).value


# bundled report

MEASURES = ("s_vn_1", "s_vn_2", "discord", "concurrence", "three_tangle", "q_measure")


@dataclass(frozen=True)
class CorrelationReport:
    s_vn_1: Optional[float] = None
    s_vn_2: Optional[float] = None
    discord: Optional[float] = None
    concurrence: Optional[float] = None
    three_tangle: Optional[float] = None
    q_measure: Optional[float] = None

    def present(self) -> dict:
        """Fields that were computed, in canonical order."""
        return {f.name: getattr(self, f.name) for f in fields(self) if getattr(self, f.name) is not None}

    def max_deviation(self, other: "CorrelationReport") -> tuple[float, Optional[str]]:
        """Largest per-field difference and the field where it occurs.

        A field present in one report and absent in the other counts as an
        infinite deviation.
        """
        worst, where = 0.0, None
        for name in MEASURES:
            x, y = getattr(self, name), getattr(other, name)
            if x is None and y is None:
                continue
            d = math.inf if (x is None or y is None) else abs(x - y)
            if d > worst or where is None:
                worst, where = d, name
        return worst, where


def applicable_measures(two_j: int) -> tuple[str, ...]:
    out = ["s_vn_1"]
    if two_j >= 3:
        out.append("s_vn_2")
    out += ["discord", "concurrence"]
    if two_j == 3:
        out.append("three_tangle")
    out.append("q_measure")
    return tuple(out)


def report(psi: DickeVector, discord_settings: DiscordSettings = FINE, measures=None) -> CorrelationReport:
    """Every applicable measure for ``psi``.

    ``measures`` restricts the computation to a subset of field names; the
    remaining fields are left absent.
    """
    two_j = psi.two_j
    if two_j < 2:
        raise ContractError("correlation report needs at least two qubits (2j >= 2)")
    wanted = set(applicable_measures(two_j))
    if measures is not None:
        unknown = set(measures) - set(MEASURES)
        if unknown:
            raise ContractError(f"unknown measures {sorted(unknown)}")
        wanted &= set(measures)
    out = {}
    rho1 = dicke_rdm(psi, 1)
    if "s_vn_1" in wanted:
        out["s_vn_1"] = von_neumann_entropy(rho1)
    if "q_measure" in wanted:
        out["q_measure"] = float(min(1.0, max(0.0, 2 * (1 - rho1.purity()))))
    if "s_vn_2" in wanted:
        out["s_vn_2"] = von_neumann_entropy(dicke_rdm(psi, 2))
    if wanted & {"discord", "concurrence", "three_tangle"}:
        w = dicke_embedding(2) @ dicke_block_factor(psi, 2)
        rho4 = ReducedDensityMatrix(2, QUBIT, w @ w.conj().T)
        c12 = concurrence_from_factor(w)
        if "concurrence" in wanted:
            out["concurrence"] = c12
        if "discord" in wanted:
            out["discord"] = quantum_discord(rho4, discord_settings)
        if "three_tangle" in wanted:
            tau = 4 * np.linalg.det(rho1.entries).real - 2 * c12**2
            out["three_tangle"] = float(min(1.0, max(0.0, tau)))
    return CorrelationReport(**out)
