"""Reduced density matrices of qubit blocks of a symmetric state.

Qubit conventions: qubit ``i`` is the ``i``-th most significant bit of a
standard-basis index and a set bit means the qubit points down (``|0>``,
``sigma_z = -1``).  Index 0 is therefore the all-up state ``|11...1>``,
matching Dicke index ``n = 0``, and the two-qubit basis reads
``|11>, |10>, |01>, |00>``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from . import spinalg
from .spinalg import ContractError, DickeVector

MAX_ORACLE_QUBITS = 12
DENSITY_TOL = 1e-12
CLAMP_TOL = 1e-10

SYMMETRIC = "symmetric"
QUBIT = "qubit"


@dataclass(frozen=True, eq=False)
class ReducedDensityMatrix:
    q: int
    basis: str
    entries: np.ndarray

    def __post_init__(self):
        rho = np.array(self.entries, dtype=complex)
        dim = self.q + 1 if self.basis == SYMMETRIC else 2**self.q
        if self.basis not in (SYMMETRIC, QUBIT):
            raise ContractError(f"unknown basis label {self.basis!r}")
        if rho.shape != (dim, dim):
            raise ContractError(f"{self.basis} RDM of {self.q} qubits needs shape {(dim, dim)}, got {rho.shape}")
        rho.setflags(write=False)
        object.__setattr__(self, "entries", rho)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def eigenvalues(self) -> np.ndarray:
        """Ascending eigenvalues with round-off negatives clamped to zero."""
        return clamp_spectrum(spinalg.hermitian_eigensystem(self.entries, tol=1e-9).eigenvalues)

    def purity(self) -> float:
        return float(np.real(np.trace(self.entries @ self.entries)))

    def check(self, tol: float = DENSITY_TOL) -> None:
        """Raise unless Hermitian, unit trace and positive semidefinite."""
        check_density_matrix(self.entries, tol)


def clamp_spectrum(vals: np.ndarray) -> np.ndarray:
    vals = np.array(vals, dtype=float)
    if vals.size and vals.min() < -CLAMP_TOL:
        raise ContractError(f"density matrix has eigenvalue {vals.min():.3e} < -{CLAMP_TOL}")
    vals[vals < 0] = 0.0
    return vals


def check_density_matrix(rho, tol: float = DENSITY_TOL) -> None:
    rho = np.asarray(rho)
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > tol:
        raise ContractError(f"not Hermitian: max |rho - rho^dagger| = {herm:.3e}")
    tr = np.trace(rho)
    if abs(tr - 1) > tol:
        raise ContractError(f"trace {tr:.15g} differs from 1")
    lo = np.linalg.eigvalsh((rho + rho.conj().T) / 2).min()
    if lo < -CLAMP_TOL:
        raise ContractError(f"not positive semidefinite: min eigenvalue {lo:.3e}")


@dataclass(frozen=True, eq=False)
class QubitExpansion:
    """A symmetric state written out over all ``2**N`` qubit basis states."""

    n_qubits: int
    amplitudes: np.ndarray

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.n_qubits)

    def permuted(self, perm) -> np.ndarray:
        """Amplitudes after relabelling qubits by ``perm``."""
        return np.transpose(self.tensor(), perm).reshape(-1)


def expand_to_qubits(psi: DickeVector) -> QubitExpansion:
    """Spread each Dicke amplitude uniformly over the bitstrings with that many down-spins.

    The normalisation counts the bitstrings directly rather than using the
    shared binomial table, so this stays an independent route.
    """
    nq = psi.two_j
    if nq > MAX_ORACLE_QUBITS:
        raise ContractError(f"qubit expansion limited to 2j <= {MAX_ORACLE_QUBITS}, got 2j={nq}")
    out = np.zeros(2**nq, dtype=complex)
    for n, c in enumerate(psi.amplitudes):
        idx = [sum(1 << (nq - 1 - b) for b in bits) for bits in combinations(range(nq), n)]
        out[idx] = c / np.sqrt(len(idx))
    return QubitExpansion(nq, out)


def brute_force_rdm(full: QubitExpansion, keep) -> ReducedDensityMatrix:
    """Partial trace over every qubit not listed in ``keep`` (kept in ascending order)."""
    keep = sorted(set(int(i) for i in keep))
    nq = full.n_qubits
    if not keep or keep[0] < 0 or keep[-1] >= nq:
        raise ContractError(f"bad qubit indices {keep} for {nq} qubits")
    rest = [i for i in range(nq) if i not in keep]
    m = np.transpose(full.tensor(), keep + rest).reshape(2 ** len(keep), -1)
    return ReducedDensityMatrix(len(keep), QUBIT, m @ m.conj().T)


@lru_cache(maxsize=256)
def _split_weights(two_j: int, q: int) -> np.ndarray:
    """``w[a, r] = sqrt(C(q,a) C(2j-q,r) / C(2j,a+r))``."""
    w = np.zeros((q + 1, two_j - q + 1))
    for a in range(q + 1):
        for r in range(two_j - q + 1):
            num = spinalg.binomial(q, a) * spinalg.binomial(two_j - q, r)
            w[a, r] = np.sqrt(num / spinalg.binomial(two_j, a + r))
    w.setflags(write=False)
    return w


def dicke_block_factor(psi: DickeVector, q: int) -> np.ndarray:
    """Matrix ``F`` with ``dicke_rdm(psi, q) = F F^dagger``.

    Row ``a`` counts down-spins in the kept block of ``q`` qubits, column ``r``
    those in the remaining ``2j - q``.
    """
    two_j = psi.two_j
    if not 1 <= q <= two_j:
        raise ContractError(f"q must lie in [1, {two_j}], got {q}")
    c = psi.amplitudes
    w = _split_weights(two_j, q)
    nr = two_j - q + 1
    factor = np.zeros((q + 1, nr), dtype=complex)
    for a in range(q + 1):
        factor[a] = c[a : a + nr] * w[a]
    return factor


def dicke_rdm(psi: DickeVector, q: int) -> ReducedDensityMatrix:
    """State of the first ``q`` qubits, in the Dicke basis of those qubits.

    Splits ``|2j, n>`` over the block bipartition ``q | 2j-q``; index ``a`` of the
    result counts down-spins inside the kept block.
    """
    f = dicke_block_factor(psi, q)
    return ReducedDensityMatrix(q, SYMMETRIC, f @ f.conj().T)


def dicke_embedding(q: int) -> np.ndarray:
    """Isometry from the ``q+1`` Dicke states into the ``2**q`` qubit basis."""
    emb = np.zeros((2**q, q + 1))
    for idx in range(2**q):
        emb[idx, bin(idx).count("1")] = 1.0
    return emb / np.sqrt(emb.sum(axis=0))


def embed_symmetric(rdm: ReducedDensityMatrix) -> ReducedDensityMatrix:
    if rdm.basis != SYMMETRIC:
        raise ContractError("expected an RDM in the symmetric Dicke basis")
    e = dicke_embedding(rdm.q)
    return ReducedDensityMatrix(rdm.q, QUBIT, e @ rdm.entries @ e.T)


def symmetric_to_qubit_basis(rdm: ReducedDensityMatrix) -> ReducedDensityMatrix:
    """Two-qubit Dicke-basis RDM as a 4x4 matrix on ``|11>, |10>, |01>, |00>``."""
    if rdm.basis != SYMMETRIC or rdm.q != 2:
        raise ContractError(f"need a 2-qubit symmetric-basis RDM, got q={rdm.q}, basis={rdm.basis}")
    return embed_symmetric(rdm)
