"""Angular-momentum algebra in the symmetric (Dicke) subspace.

Basis ordering is fixed throughout the package: index ``n = 0..2j`` holds
the amplitude of ``|j, j-n>``, i.e. ``m`` runs from ``+j`` down to ``-j`` and
``n`` counts down-spins measured from the all-up state.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb

import numpy as np

MAX_TWO_J = 64
HERMITIAN_TOL = 1e-10


class ContractError(ValueError):
    """Input violates an operation's precondition."""


class NumericalError(RuntimeError):
    """A numerical routine failed to produce a trustworthy result."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True, order=True)
class SpinQuantum:
    """Spin quantum number stored exactly as ``two_j = 2j``."""

    two_j: int

    def __post_init__(self):
        if not isinstance(self.two_j, (int, np.integer)) or isinstance(self.two_j, bool):
            raise ContractError(f"two_j must be an integer, got {self.two_j!r}")
        if self.two_j < 1:
            raise ContractError(f"two_j must be >= 1, got {self.two_j}")
        if self.two_j > MAX_TWO_J:
            raise ContractError(f"two_j={self.two_j} exceeds supported maximum {MAX_TWO_J}")
        object.__setattr__(self, "two_j", int(self.two_j))

    @classmethod
    def parse(cls, text) -> "SpinQuantum":
        """Build from ``"3/2"``, ``"1"``, ``1.5`` or a :class:`Fraction`."""
        if isinstance(text, SpinQuantum):
            return text
        j = Fraction(str(text).strip()) if not isinstance(text, Fraction) else text
        two_j = 2 * j
        if two_j.denominator != 1:
            raise ContractError(f"j={text} is not a multiple of 1/2")
        return cls(int(two_j))

    @property
    def j(self) -> float:
        return self.two_j / 2

    @property
    def dim(self) -> int:
        return self.two_j + 1

    @property
    def is_integer(self) -> bool:
        return self.two_j % 2 == 0

    def m_values(self) -> np.ndarray:
        """``m`` at each basis index, descending from ``j``."""
        return self.j - np.arange(self.dim)

    def __str__(self):
        return str(self.two_j // 2) if self.is_integer else f"{self.two_j}/2"


def as_spin(j) -> SpinQuantum:
    return j if isinstance(j, SpinQuantum) else SpinQuantum.parse(j)


@lru_cache(maxsize=None)
def binomial_row(n: int) -> tuple[int, ...]:
    """Exact ``C(n, 0..n)`` as Python integers."""
    return tuple(comb(n, r) for r in range(n + 1))


def binomial(n: int, r: int) -> int:
    if r < 0 or r > n:
        return 0
    return binomial_row(n)[r]


def jz_matrix(j) -> np.ndarray:
    spin = as_spin(j)
    return np.diag(spin.m_values().astype(complex))


def jplus_matrix(j) -> np.ndarray:
    """Raising operator; maps index n (m = j-n) to index n-1."""
    spin = as_spin(j)
    jj = spin.j
    out = np.zeros((spin.dim, spin.dim), dtype=complex)
    for n in range(1, spin.dim):
        m = jj - n
        out[n - 1, n] = np.sqrt((jj - m) * (jj + m + 1))
    return out


def jminus_matrix(j) -> np.ndarray:
    return jplus_matrix(j).conj().T


def jy_matrix(j) -> np.ndarray:
    jp = jplus_matrix(j)
    jm = jp.conj().T
    return (jp - jm) / 2j


def jx_matrix(j) -> np.ndarray:
    jp = jplus_matrix(j)
    return (jp + jp.conj().T) / 2


NORM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class DickeVector:
    """State of the top: amplitudes over ``|j, j-n>``, ``n = 0..2j``."""

    spin: SpinQuantum
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (self.spin.dim,):
            raise ContractError(
                f"expected {self.spin.dim} amplitudes for j={self.spin}, got shape {amps.shape}"
            )
        norm = np.vdot(amps, amps).real
        if abs(norm - 1.0) > NORM_TOL:
            raise ContractError(f"state norm^2 = {norm!r}, expected 1")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, spin, amplitudes) -> "DickeVector":
        amps = np.asarray(amplitudes, dtype=complex)
        return cls(as_spin(spin), amps / np.linalg.norm(amps))

    @classmethod
    def random(cls, spin, rng: np.random.Generator) -> "DickeVector":
        spin = as_spin(spin)
        z = rng.normal(size=spin.dim) + 1j * rng.normal(size=spin.dim)
        return cls.normalized(spin, z)

    @classmethod
    def basis(cls, spin, n: int) -> "DickeVector":
        spin = as_spin(spin)
        amps = np.zeros(spin.dim, dtype=complex)
        amps[n] = 1.0
        return cls(spin, amps)

    @property
    def two_j(self) -> int:
        return self.spin.two_j

    def __len__(self):
        return self.spin.dim


@dataclass(frozen=True)
class HermitianEigensystem:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def apply_function(self, fn) -> np.ndarray:
        """Matrix function ``V f(lambda) V^dagger``."""
        v = self.eigenvectors
        return (v * fn(self.eigenvalues)) @ v.conj().T


def hermitian_eigensystem(h, tol: float = HERMITIAN_TOL) -> HermitianEigensystem:
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ContractError(f"expected a square matrix, got shape {h.shape}")
    asym = np.max(np.abs(h - h.conj().T)) if h.size else 0.0
    if asym > tol:
        raise ContractError(f"matrix is not Hermitian (max |H - H^dagger| = {asym:.3e})")
    h = (h + h.conj().T) / 2
    try:
        vals, vecs = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    vals.setflags(write=False)
    vecs.setflags(write=False)
    return HermitianEigensystem(vals, vecs)


@lru_cache(maxsize=128)
def _jy_eigensystem(two_j: int) -> HermitianEigensystem:
    return hermitian_eigensystem(jy_matrix(SpinQuantum(two_j)))


def torsion_exp(j, k: float) -> np.ndarray:
    """Kick factor ``exp(-i k/(2j) Jz^2)`` (diagonal)."""
    spin = as_spin(j)
    m = spin.m_values()
    return np.diag(np.exp(-1j * (k / spin.two_j) * m * m))


def rotation_exp(j, p: float) -> np.ndarray:
    """Precession factor ``exp(-i p Jy)`` built from the eigensystem of Jy."""
    spin = as_spin(j)
    if not np.isfinite(p):
        raise ContractError(f"rotation angle must be finite, got {p}")
    eig = _jy_eigensystem(spin.two_j)
    return eig.apply_function(lambda lam: np.exp(-1j * p * lam))


def coherent_amplitudes(two_j: int, theta: float, phi: float) -> np.ndarray:
    """Amplitudes of ``exp(-i phi Jz) exp(-i theta Jy) |j, j>``."""
    jj = two_j / 2
    n = np.arange(two_j + 1)
    m = jj - n
    weights = np.sqrt(np.array(binomial_row(two_j), dtype=float))
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    # 0**0 == 1 handles the poles exactly
    mag = weights * c ** (two_j - n) * s ** n
    return mag * np.exp(-1j * m * phi)


def coherent_state(j, theta: float, phi: float) -> "DickeVector":
    """Spin coherent state pointing along ``(theta, phi)``."""
    spin = as_spin(j)
    if not (0.0 <= theta <= np.pi):
        raise ContractError(f"theta={theta} outside [0, pi]")
    if not (-np.pi < phi <= np.pi):
        raise ContractError(f"phi={phi} outside (-pi, pi]")
    return DickeVector(spin, coherent_amplitudes(spin.two_j, theta, phi))


def wrap_phi(phi: float) -> float:
    """Map any angle into ``(-pi, pi]``."""
    w = float(np.mod(phi + np.pi, 2 * np.pi) - np.pi)
    return np.pi if w == -np.pi else w
