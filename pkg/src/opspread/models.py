"""Spin-chain dynamics, observables, and random-matrix baselines.

Three families of dynamics on L qubits (d = 2^L), all with free boundary:

* tilted-field kicked Ising (Floquet map: Ising phase then kick),
* tilted-field Ising without kicks (time-independent Hamiltonian),
* Heisenberg XXZ chain with a single magnetic impurity.

Also provides the bit-reversal (reflection) operator and COE/GOE samplers
that are block diagonal in the reflection eigenbasis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .opspace import is_hermitian

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
PAULI = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}


@dataclass(frozen=True)
class IsingParams:
    """Tilted-field Ising chain parameters (free boundary, L >= 2)."""

    L: int
    J: float = 1.0
    h_x: float = 1.4
    h_z: float = 1.4
    kicked: bool = True

    def __post_init__(self):
        if self.L < 2:
            raise ValueError(f"need at least 2 spins, got L={self.L}")


@dataclass(frozen=True)
class XXZParams:
    """XXZ chain with a single impurity of strength g at site ``impurity_site``.

    ``impurity_axis``: 'z' adds (g/2) sigma^z_l (Pauli convention), 'y' adds
    (g/2) s^y_l with s = sigma/2 (spin convention), matching the two forms
    the model is commonly stated in.
    """

    L: int
    J_xy: float = 1.0
    J_zz: float = 1.1
    g: float = 0.0
    impurity_site: int = 1
    impurity_axis: str = "z"

    def __post_init__(self):
        if self.L < 2:
            raise ValueError(f"need at least 2 spins, got L={self.L}")
        if not 1 <= self.impurity_site <= self.L:
            raise ValueError(
                f"impurity site {self.impurity_site} outside 1..{self.L}"
            )
        if self.impurity_axis not in ("y", "z"):
            raise ValueError(f"unsupported impurity axis {self.impurity_axis!r}")


@dataclass(frozen=True, eq=False)
class Observable:
    """Hermitian d x d matrix with a human-readable label."""

    matrix: np.ndarray
    label: str


def kron_all(ops) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for op in ops:
        out = np.kron(out, op)
    return out


def pauli_at(axis: str, site: int, L: int) -> np.ndarray:
    """sigma^axis at 1-based ``site``, identity elsewhere."""
    if axis not in PAULI:
        raise ValueError(f"unknown axis {axis!r}")
    if not 1 <= site <= L:
        raise ValueError(f"site {site} outside 1..{L}")
    ops = [np.eye(2, dtype=np.complex128)] * L
    ops[site - 1] = PAULI[axis]
    return kron_all(ops)


def site_observable(axis: str, site: int, L: int) -> Observable:
    """Single-site spin operator s^axis_site = sigma^axis_site / 2."""
    return Observable(0.5 * pauli_at(axis, site, L), f"s{site}{axis}")


def collective_observable(axis: str, L: int) -> Observable:
    """Collective spin S_axis = (1/2) sum_j sigma^axis_j."""
    m = sum(pauli_at(axis, j, L) for j in range(1, L + 1))
    return Observable(0.5 * m, f"S{axis}")


def sum_site_observable(terms, L: int) -> Observable:
    """Sum of single-site spin operators; ``terms`` is [(axis, site), ...]."""
    m = sum(0.5 * pauli_at(axis, site, L) for axis, site in terms)
    label = "+".join(f"s{site}{axis}" for axis, site in terms)
    return Observable(m, label)


def _ising_zz_diagonal(L: int) -> np.ndarray:
    """Diagonal of sum_{j=1}^{L-1} sigma^z_j sigma^z_{j+1} over basis states."""
    d = 2**L
    states = np.arange(d)
    bits = (states[:, None] >> np.arange(L - 1, -1, -1)) & 1
    z = 1 - 2 * bits
    return np.sum(z[:, :-1] * z[:, 1:], axis=1).astype(float)


def _kick_2x2(h_x: float, h_z: float) -> np.ndarray:
    """exp(-i (h_z sigma_z + h_x sigma_x)) for a single qubit."""
    h = np.hypot(h_x, h_z)
    if h == 0.0:
        return np.eye(2, dtype=np.complex128)
    n = (h_z * SIGMA_Z + h_x * SIGMA_X) / h
    return np.cos(h) * np.eye(2) - 1j * np.sin(h) * n


def tki_floquet(p: IsingParams) -> np.ndarray:
    """One-period Floquet map of the kicked tilted-field Ising chain.

    U = exp(-i J sum_j sz_j sz_{j+1}) exp(-i sum_j (h_z sz_j + h_x sx_j));
    the Ising factor is diagonal, the kick factors into 2x2 exponentials.
    """
    if not p.kicked:
        raise ValueError("tki_floquet requires kicked=True")
    phase = np.exp(-1j * p.J * _ising_zz_diagonal(p.L))
    kick = kron_all([_kick_2x2(p.h_x, p.h_z)] * p.L)
    return phase[:, None] * kick


def ti_hamiltonian(p: IsingParams) -> np.ndarray:
    """H = sum_{j<L} J sz_j sz_{j+1} + sum_j (h_z sz_j + h_x sx_j)."""
    d = 2**p.L
    H = np.diag(p.J * _ising_zz_diagonal(p.L)).astype(np.complex128)
    for j in range(1, p.L + 1):
        H += p.h_z * pauli_at("z", j, p.L) + p.h_x * pauli_at("x", j, p.L)
    assert H.shape == (d, d)
    return H


def unitary_from_hamiltonian(H: np.ndarray, t: float) -> np.ndarray:
    """exp(-i H t) via Hermitian eigendecomposition."""
    evals, evecs = np.linalg.eigh(H)
    return (evecs * np.exp(-1j * evals * t)) @ evecs.conj().T


def ti_unitary(p: IsingParams, t: float = 1.0) -> np.ndarray:
    """Time evolution exp(-i t H_TI) of the unkicked tilted-field chain."""
    if p.kicked:
        raise ValueError("ti_unitary requires kicked=False")
    return unitary_from_hamiltonian(ti_hamiltonian(p), t)


def xxz_hamiltonian(p: XXZParams) -> np.ndarray:
    """XXZ chain with a single impurity field.

    H = sum_{j<L} (J_xy/4)(sx_j sx_{j+1} + sy_j sy_{j+1})
        + (J_zz/4) sz_j sz_{j+1} + impurity term (see XXZParams).
    """
    L = p.L
    H = np.zeros((2**L, 2**L), dtype=np.complex128)
    for j in range(1, L):
        H += (p.J_xy / 4.0) * (
            pauli_at("x", j, L) @ pauli_at("x", j + 1, L)
            + pauli_at("y", j, L) @ pauli_at("y", j + 1, L)
        )
        H += (p.J_zz / 4.0) * pauli_at("z", j, L) @ pauli_at("z", j + 1, L)
    imp = pauli_at(p.impurity_axis, p.impurity_site, L)
    if p.impurity_axis == "y":
        imp = 0.5 * imp  # spin convention s = sigma/2
    H += (p.g / 2.0) * imp
    assert is_hermitian(H, 1e-12)
    return H


def _bit_reverse(i: int, L: int) -> int:
    out = 0
    for _ in range(L):
        out = (out << 1) | (i & 1)
        i >>= 1
    return out


def reflection_operator(L: int) -> np.ndarray:
    """Permutation unitary reversing the qubit order (an involution)."""
    if L < 2:
        raise ValueError(f"need at least 2 spins, got L={L}")
    d = 2**L
    R = np.zeros((d, d))
    for i in range(d):
        R[_bit_reverse(i, L), i] = 1.0
    return R


def reflection_eigenbasis(L: int) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal eigenbasis of the reflection operator.

    Returns (V, parities): columns of V are even-parity vectors first, then
    odd-parity ones; parities is the matching array of +/-1 eigenvalues.
    """
    d = 2**L
    even, odd = [], []
    for i in range(d):
        r = _bit_reverse(i, L)
        if r == i:
            v = np.zeros(d)
            v[i] = 1.0
            even.append(v)
        elif r > i:
            plus = np.zeros(d)
            plus[i] = plus[r] = 1.0 / np.sqrt(2.0)
            minus = np.zeros(d)
            minus[i], minus[r] = 1.0 / np.sqrt(2.0), -1.0 / np.sqrt(2.0)
            even.append(plus)
            odd.append(minus)
    V = np.stack(even + odd, axis=1)
    parities = np.array([1] * len(even) + [-1] * len(odd))
    return V, parities


def as_rng(seed_or_rng) -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)


def haar_unitary(n: int, rng) -> np.ndarray:
    """Haar-distributed U(n) sample via phase-fixed QR of a Ginibre matrix."""
    rng = as_rng(rng)
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * ph


def goe_sample(L: int, rng) -> np.ndarray:
    """GOE Hamiltonian commuting with the chain reflection.

    Each parity block is (A + A^T)/2 with i.i.d. standard normal A
    (off-diagonal variance 1/2, diagonal variance 1).
    """
    rng = as_rng(rng)
    V, parities = reflection_eigenbasis(L)
    d = 2**L
    H = np.zeros((d, d))
    start = 0
    for parity in (1, -1):
        m = int(np.sum(parities == parity))
        a = rng.standard_normal((m, m))
        H[start : start + m, start : start + m] = 0.5 * (a + a.T)
        start += m
    return (V @ H @ V.T).astype(np.complex128)


def coe_sample(L: int, rng) -> np.ndarray:
    """COE unitary (W^T W per parity block) commuting with the reflection."""
    rng = as_rng(rng)
    V, parities = reflection_eigenbasis(L)
    d = 2**L
    U = np.zeros((d, d), dtype=np.complex128)
    start = 0
    for parity in (1, -1):
        m = int(np.sum(parities == parity))
        w = haar_unitary(m, rng)
        U[start : start + m, start : start + m] = w.T @ w
        start += m
    return V @ U @ V.T
