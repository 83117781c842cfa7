"""Floquet operator of the kicked top and stroboscopic evolution."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import gcd, pi
from typing import Optional

import numpy as np

from . import spinalg
from .spinalg import ContractError, DickeVector, SpinQuantum, as_spin

log = logging.getLogger(__name__)

RENORM_TOL = 1e-12

# symbolic precession angles, in units of pi/2
P_SYMBOLS = {"0": 0, "pi/2": 1, "pi": 2, "3pi/2": 3, "2pi": 4}


def parse_p(text) -> tuple[float, Optional[int]]:
    """Parse a precession angle.

    Symbolic values (``0``, ``pi/2``, ``pi``, ``3pi/2``, ``2pi``) return the
    exact multiple of pi/2 as the second element; anything else is read as a
    float in radians and the multiple is ``None``.
    """
    if isinstance(text, (int, float, np.floating)) and not isinstance(text, bool):
        return float(text), None
    key = str(text).strip().lower().replace(" ", "").replace("*", "")
    if key in P_SYMBOLS:
        q = P_SYMBOLS[key]
        return q * pi / 2, q
    try:
        return float(key), None
    except ValueError:
        raise ContractError(f"cannot parse precession angle {text!r}") from None


@dataclass(frozen=True)
class RationalKick:
    """Kick strength ``k = r*pi/s`` with ``r/s`` stored in lowest terms."""

    r: int
    s: int

    def __post_init__(self):
        if self.r < 1 or self.s < 1:
            raise ContractError(f"r and s must be positive, got r={self.r}, s={self.s}")
        g = gcd(self.r, self.s)
        object.__setattr__(self, "r", self.r // g)
        object.__setattr__(self, "s", self.s // g)

    @property
    def k(self) -> float:
        return self.r * pi / self.s

    def __str__(self):
        return f"{self.r}pi/{self.s}"


@dataclass(frozen=True)
class FloquetParams:
    """Kicked-top parameters. ``p_halfpi`` is set when ``p`` is an exact multiple of pi/2."""

    spin: SpinQuantum
    k: float
    p: float
    p_halfpi: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "spin", as_spin(self.spin))
        if not (np.isfinite(self.k) and np.isfinite(self.p)):
            raise ContractError(f"k and p must be finite, got k={self.k}, p={self.p}")
        if self.p_halfpi is not None and self.p != self.p_halfpi * pi / 2:
            raise ContractError("p disagrees with its symbolic multiple of pi/2")

    @classmethod
    def make(cls, j, k: float, p) -> "FloquetParams":
        pval, q = parse_p(p)
        return cls(as_spin(j), float(k), pval, q)

    def with_k(self, k: float) -> "FloquetParams":
        return FloquetParams(self.spin, float(k), self.p, self.p_halfpi)

    def describe(self) -> dict:
        return {
            "j": str(self.spin),
            "k": self.k,
            "p": self.p,
            "p_halfpi": self.p_halfpi,
        }


def build_floquet(params: FloquetParams) -> np.ndarray:
    """One-period propagator ``exp(-i k/(2j) Jz^2) exp(-i p Jy)``."""
    return spinalg.torsion_exp(params.spin, params.k) @ spinalg.rotation_exp(params.spin, params.p)


@dataclass(frozen=True)
class EvolutionRecord:
    params: FloquetParams
    initial: DickeVector
    states: list = field(repr=False)
    renormalizations: int = 0

    @property
    def t_max(self) -> int:
        return len(self.states) - 1

    def amplitudes(self) -> np.ndarray:
        """All states stacked as a ``(t_max+1, 2j+1)`` array."""
        return np.array([s.amplitudes for s in self.states])


def evolve(params: FloquetParams, psi0: DickeVector, t_max: int, floquet=None) -> EvolutionRecord:
    """Apply the Floquet operator ``t_max`` times, keeping every state.

    ``floquet`` may supply a precomputed propagator for ``params``.
    """
    if t_max < 0:
        raise ContractError(f"t_max must be >= 0, got {t_max}")
    if psi0.spin != params.spin:
        raise ContractError(f"state has j={psi0.spin}, params have j={params.spin}")
    u = build_floquet(params) if floquet is None else floquet
    states = [psi0]
    psi = psi0.amplitudes
    renorm = 0
    for t in range(1, t_max + 1):
        psi = u @ psi
        norm2 = np.vdot(psi, psi).real
        if abs(norm2 - 1.0) > RENORM_TOL:
            log.warning("renormalizing at t=%d (norm^2 drift %.3e)", t, norm2 - 1.0)
            psi = psi / np.sqrt(norm2)
            renorm += 1
        states.append(DickeVector(params.spin, psi))
    return EvolutionRecord(params, psi0, states, renorm)


# spectral data of the j=1 propagator at p = pi/2 and p = pi


def _spectral_data(k: float, p_halfpi: int):
    e = np.exp(-1j * k / 2)
    if p_halfpi == 1:
        q = np.exp(-1j * k / 4)
        w = np.exp(1j * k / 4)
        r2 = np.sqrt(2)
        vals = [e, -1j * q, 1j * q]
        vecs = [
            np.array([1 / r2, 0, 1 / r2]),
            np.array([-0.5, -1j * w / r2, 0.5]),
            np.array([-0.5, 1j * w / r2, 0.5]),
        ]
    elif p_halfpi == 2:
        r2 = np.sqrt(2)
        vals = [-e, e, -1.0]
        vecs = [
            np.array([-1 / r2, 0, 1 / r2]),
            np.array([1 / r2, 0, 1 / r2]),
            np.array([0, 1.0, 0]),
        ]
    else:
        raise ContractError("closed form available only for p = pi/2 or p = pi")
    return vals, vecs


def closed_form_power(k: float, p, n: int) -> np.ndarray:
    """``U^n`` for j=1 at ``p = pi/2`` or ``p = pi`` from the propagator's eigenpairs."""
    if isinstance(p, str):
        _, q = parse_p(p)
    else:
        q = p if isinstance(p, (int, np.integer)) and not isinstance(p, bool) else None
    if q not in (1, 2):
        raise ContractError(
            f"closed_form_power needs p given as 'pi/2'/'pi' or halfpi multiple 1/2, got {p!r}"
        )
    if n < 0:
        raise ContractError(f"n must be >= 0, got {n}")
    vals, vecs = _spectral_data(k, q)
    out = np.zeros((3, 3), dtype=complex)
    for lam, v in zip(vals, vecs):
        out += lam**n * np.outer(v, v.conj())
    return out


def parity_operator(j) -> np.ndarray:
    """``exp(-i pi Jz^2)``, diagonal in the Dicke basis."""
    spin = as_spin(j)
    m = spin.m_values()
    # reduce m^2 mod 2 before exponentiating so integer j gives exact +-1
    return np.diag(np.exp(-1j * pi * np.mod(m * m, 2.0)))


def local_sigmaz_product(psi: DickeVector) -> DickeVector:
    """Action of sigma_z on every qubit: amplitude n picks up ``(-1)^n``."""
    signs = (-1.0) ** np.arange(psi.spin.dim)
    return DickeVector(psi.spin, psi.amplitudes * signs)


def align_phase(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Return ``b`` times the global phase that best matches ``a``.

    The phase is read off the largest-magnitude amplitude of ``a``.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    i = int(np.argmax(np.abs(a)))
    if abs(b[i]) == 0.0:
        return b
    phase = (a[i] / abs(a[i])) / (b[i] / abs(b[i]))
    return b * phase


def phase_residual(a: np.ndarray, b: np.ndarray) -> float:
    """Max-abs difference of two vectors after global-phase alignment."""
    return float(np.max(np.abs(np.asarray(a) - align_phase(a, b))))


@dataclass(frozen=True)
class ParityLUResult:
    ok: bool
    residual: float
    local_unitary: str


def verify_parity_lu_identity(j, psi: DickeVector, tol: float = 1e-12) -> ParityLUResult:
    """Check that the parity operator acts on ``psi`` as a local unitary.

    For integer j the partner is sigma_z on every qubit; for half-integer j
    ``exp(-i pi m^2)`` is the same phase for every m, so the partner is the
    identity.
    """
    spin = as_spin(j)
    lhs = parity_operator(spin) @ psi.amplitudes
    if spin.is_integer:
        rhs = local_sigmaz_product(psi).amplitudes
        name = "sigma_z^{(x)2j}"
    else:
        rhs = psi.amplitudes
        name = "identity"
    res = phase_residual(lhs, rhs)
    return ParityLUResult(res < tol, res, name)
