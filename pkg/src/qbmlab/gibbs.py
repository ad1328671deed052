"""Exact dense Gibbs-state backend.

Builds rho = exp(H_theta) / Z by Hermitian eigendecomposition (with the
usual max-eigenvalue shift before exponentiating), and provides
expectation values, relative entropy, and trace distance. All entropies
are in nats.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np
import scipy.linalg

from .operators import Ansatz, PauliTerm, ansatz_action, pauli_action

if TYPE_CHECKING:  # pragma: no cover
    from .targets import Dataset

EIGENVALUE_CUTOFF = 1e-14  # below this, target eigenvalues count as exact zeros


@dataclass
class GibbsModel:
    """Gibbs state of an ansatz at parameters theta, with cached spectra.

    Immutable after construction; ``rho`` eigenvalues are the softmax of
    ``eigvals`` and ``log_Z = logsumexp(eigvals)``.
    """

    ansatz: Ansatz
    theta: np.ndarray
    eigvals: np.ndarray
    eigvecs: np.ndarray
    log_Z: float
    rho: np.ndarray

    @property
    def n(self) -> int:
        return self.ansatz.n

    @property
    def probabilities(self) -> np.ndarray:
        """Eigenvalues of rho (softmax of the Hamiltonian spectrum)."""
        w = np.exp(self.eigvals - np.max(self.eigvals))
        return w / w.sum()


def hamiltonian_matrix(ansatz: Ansatz, theta: np.ndarray) -> np.ndarray:
    """Dense H_theta = sum_i theta_i P_i."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (ansatz.m,):
        raise ValueError(f"theta must have length m={ansatz.m}, got shape {theta.shape}")
    perm, phase = ansatz_action(ansatz)
    dim = 1 << ansatz.n
    H = np.zeros((dim, dim), dtype=complex)
    vals = theta[:, None] * phase
    cols = np.broadcast_to(np.arange(dim), perm.shape)
    np.add.at(H, (perm.ravel(), cols.ravel()), vals.ravel())
    return H


def gibbs_from_hamiltonian(H: np.ndarray) -> tuple[np.ndarray, np.ndarray, float, np.ndarray]:
    """Eigendecompose H and return (eigvals, eigvecs, log_Z, rho)."""
    eigvals, eigvecs = scipy.linalg.eigh(H, driver="evd", check_finite=False)
    shift = eigvals[-1]
    w = np.exp(eigvals - shift)
    total = w.sum()
    log_Z = float(shift + np.log(total))
    p = w / total
    rho = (eigvecs * p) @ eigvecs.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return eigvals, eigvecs, log_Z, rho


def gibbs_state(ansatz: Ansatz, theta: np.ndarray) -> GibbsModel:
    """Build the Gibbs model rho = exp(sum_i theta_i P_i) / Z."""
    theta = np.asarray(theta, dtype=float)
    if not np.all(np.isfinite(theta)):
        raise ValueError("theta contains non-finite entries")
    H = hamiltonian_matrix(ansatz, theta)
    eigvals, eigvecs, log_Z, rho = gibbs_from_hamiltonian(H)
    return GibbsModel(ansatz=ansatz, theta=theta.copy(), eigvals=eigvals,
                      eigvecs=eigvecs, log_Z=log_Z, rho=rho)


def _expectation_density(rho: np.ndarray, term: PauliTerm) -> complex:
    perm, phase = pauli_action(term)
    return np.sum(phase * rho[np.arange(rho.shape[0]), perm])


def _expectation_statevector(psi: np.ndarray, term: PauliTerm) -> complex:
    perm, phase = pauli_action(term)
    return np.sum(phase * psi[perm].conj() * psi)


def expectation(state, term: PauliTerm) -> float:
    """Tr[rho P] for a GibbsModel, a density matrix, or a statevector."""
    dim = 1 << term.n
    if isinstance(state, GibbsModel):
        if state.n != term.n:
            raise ValueError(f"term acts on {term.n} qubits, model has {state.n}")
        val = _expectation_density(state.rho, term)
    else:
        arr = np.asarray(state)
        if arr.ndim == 1:
            if arr.shape != (dim,):
                raise ValueError(f"statevector has dim {arr.shape}, term needs {dim}")
            val = _expectation_statevector(arr, term)
        elif arr.ndim == 2:
            if arr.shape != (dim, dim):
                raise ValueError(f"density matrix has shape {arr.shape}, term needs {dim}x{dim}")
            val = _expectation_density(arr, term)
        else:
            raise ValueError("state must be a GibbsModel, density matrix, or statevector")
    if abs(val.imag) > 1e-10:
        raise ValueError(f"expectation has imaginary residue {val.imag:.2e}")
    return float(val.real)


def expectations(model: GibbsModel) -> np.ndarray:
    """All ansatz-term expectations of the model, as one vector."""
    perm, phase = ansatz_action(model.ansatz)
    dim = 1 << model.n
    gathered = model.rho[np.arange(dim)[None, :], perm]
    vals = np.sum(phase * gathered, axis=1)
    if np.max(np.abs(vals.imag)) > 1e-10:
        raise ValueError("expectations have imaginary residue above tolerance")
    return vals.real


def negative_entropy(eta: np.ndarray, cutoff: float = EIGENVALUE_CUTOFF) -> float:
    """Tr[eta ln eta] (<= 0), with eigenvalues below cutoff treated as zero."""
    w = scipy.linalg.eigvalsh(eta)
    w = w[w > cutoff]
    return float(np.sum(w * np.log(w)))


@dataclass
class Target:
    """Target of the learning problem: expectation values, and (desk scale)
    the exact density matrix they came from.

    ``expectations`` acts as a cache; missing entries are computed on demand
    from ``psi`` (preferred, statevector contraction) or ``eta``.
    """

    n: int
    eta: np.ndarray | None = None
    psi: np.ndarray | None = None
    eta_entropy: float | None = None
    expectations: dict[PauliTerm, float] = field(default_factory=dict)
    dataset: "Dataset | None" = None
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_density(cls, eta: np.ndarray, meta: dict | None = None) -> "Target":
        eta = np.asarray(eta, dtype=complex)
        dim = eta.shape[0]
        n = int(np.log2(dim))
        if eta.shape != (dim, dim) or 1 << n != dim:
            raise ValueError(f"density matrix shape {eta.shape} is not 2^n x 2^n")
        if abs(np.trace(eta).real - 1.0) > 1e-10:
            raise ValueError("density matrix trace differs from 1")
        if scipy.linalg.eigvalsh(eta)[0] < -1e-12:
            raise ValueError("density matrix is not positive semidefinite")
        return cls(n=n, eta=eta, eta_entropy=negative_entropy(eta), meta=meta or {})

    @classmethod
    def from_statevector(cls, psi: np.ndarray, dataset: "Dataset | None" = None,
                         meta: dict | None = None) -> "Target":
        psi = np.asarray(psi, dtype=complex)
        n = int(np.log2(psi.shape[0]))
        if 1 << n != psi.shape[0]:
            raise ValueError("statevector length is not a power of two")
        norm = np.linalg.norm(psi)
        if abs(norm - 1.0) > 1e-10:
            raise ValueError("statevector is not normalized")
        eta = np.outer(psi, psi.conj())
        return cls(n=n, eta=eta, psi=psi, eta_entropy=0.0, dataset=dataset, meta=meta or {})

    @classmethod
    def from_gibbs(cls, model: GibbsModel, meta: dict | None = None) -> "Target":
        p = model.probabilities
        p = p[p > EIGENVALUE_CUTOFF]
        return cls(n=model.n, eta=model.rho, eta_entropy=float(np.sum(p * np.log(p))),
                   meta=meta or {})

    def expectation_of(self, term: PauliTerm) -> float:
        if term in self.expectations:
            return self.expectations[term]
        if self.psi is not None:
            val = expectation(self.psi, term)
        elif self.eta is not None:
            val = expectation(self.eta, term)
        else:
            raise ValueError(f"target has no stored expectation for {term} and no eta/psi")
        self.expectations[term] = val
        return val

    def expectations_for(self, ansatz: Ansatz) -> np.ndarray:
        if ansatz.n != self.n:
            raise ValueError(f"ansatz has n={ansatz.n}, target has n={self.n}")
        return np.array([self.expectation_of(t) for t in ansatz.terms])


def relative_entropy(target: Target, model: GibbsModel) -> float:
    """S(eta || rho_theta) = Tr[eta ln eta] - sum_i theta_i <H_i>_eta + ln Z.

    Uses the parameter expansion of ln rho_theta, which stays finite even
    when rho_theta has eigenvalues near the underflow limit.
    """
    if target.eta_entropy is None:
        raise ValueError("target lacks eta_entropy; cannot evaluate relative entropy")
    tvec = target.expectations_for(model.ansatz)
    return float(target.eta_entropy - model.theta @ tvec + model.log_Z)


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """(1/2) ||rho - sigma||_1 via the eigenvalues of the difference."""
    rho = np.asarray(rho)
    sigma = np.asarray(sigma)
    if rho.shape != sigma.shape or rho.ndim != 2:
        raise ValueError(f"shape mismatch {rho.shape} vs {sigma.shape}")
    w = scipy.linalg.eigvalsh(rho - sigma)
    return float(0.5 * np.sum(np.abs(w)))
