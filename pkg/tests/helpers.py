"""Independent oracles for the test suite.

Everything here is deliberately built from scratch (literal Kronecker
products, scipy expm/logm, explicit second differences) so the tests
check the package against a second, unrelated code path.
"""

import numpy as np
from scipy.linalg import expm, logm, eigh

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
LETTER = {"I": I2, "X": SX, "Y": SY, "Z": SZ}


def kron_chain(mats):
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def dense_pauli(letters: str) -> np.ndarray:
    return kron_chain([LETTER[ch] for ch in letters])


def dense_hamiltonian(terms, theta) -> np.ndarray:
    dim = 2 ** len(terms[0].letters)
    H = np.zeros((dim, dim), dtype=complex)
    for t, w in zip(terms, theta):
        H += w * dense_pauli(t.letters)
    return H


def gibbs_density(H: np.ndarray) -> np.ndarray:
    eH = expm(H)
    return eH / np.trace(eH).real


def matrix_log_relative_entropy(eta: np.ndarray, rho: np.ndarray,
                                cutoff: float = 1e-14) -> float:
    """S(eta||rho) = Tr[eta ln eta] - Tr[eta ln rho] via dense matrix logs."""
    w = eigh(eta, eigvals_only=True)
    w = w[w > cutoff]
    t1 = float(np.sum(w * np.log(w)))
    t2 = float(np.trace(eta @ logm(rho)).real)
    return t1 - t2


def random_density(rng: np.random.Generator, dim: int) -> np.ndarray:
    A = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = A @ A.conj().T
    return rho / np.trace(rho).real


def random_statevector(rng: np.random.Generator, dim: int) -> np.ndarray:
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return psi / np.linalg.norm(psi)


def fd_gradient(f, x: np.ndarray, h: float) -> np.ndarray:
    g = np.zeros_like(x)
    for i in range(len(x)):
        xp = x.copy(); xp[i] += h
        xm = x.copy(); xm[i] -= h
        g[i] = (f(xp) - f(xm)) / (2 * h)
    return g


def fd_hessian_of_scalar(f, x: np.ndarray, h: float) -> np.ndarray:
    """Second central differences of a scalar function."""
    m = len(x)
    H = np.zeros((m, m))
    f0 = f(x)
    for i in range(m):
        for j in range(i, m):
            if i == j:
                xp = x.copy(); xp[i] += h
                xm = x.copy(); xm[i] -= h
                H[i, i] = (f(xp) - 2 * f0 + f(xm)) / h ** 2
            else:
                xpp = x.copy(); xpp[i] += h; xpp[j] += h
                xpm = x.copy(); xpm[i] += h; xpm[j] -= h
                xmp = x.copy(); xmp[i] -= h; xmp[j] += h
                xmm = x.copy(); xmm[i] -= h; xmm[j] -= h
                H[i, j] = H[j, i] = (f(xpp) - f(xpm) - f(xmp) + f(xmm)) / (4 * h ** 2)
    return H


def jw_lowering_dense(n: int) -> list[np.ndarray]:
    """Independent Jordan-Wigner lowering operators (leading Z string)."""
    low = np.array([[0, 1], [0, 0]], dtype=complex)  # |0><1|
    out = []
    for i in range(n):
        out.append(kron_chain([SZ] * i + [low] + [I2] * (n - 1 - i)))
    return out
