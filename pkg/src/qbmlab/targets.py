"""Target construction: spin-chain Gibbs states, classical bitstring data
encoded as pure states, Fermionic correlation matrices, and synthetic
dataset generation."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .gibbs import Target, gibbs_state
from .operators import Ansatz, _pair, _single, chain_edges, jw_annihilation_matrices

ENUMERATION_CAP = 12


@dataclass(frozen=True)
class Dataset:
    """Bitstring samples with multiplicity; empirical distribution q(s) = count/M."""

    samples: tuple[str, ...]

    def __post_init__(self):
        if not self.samples:
            raise ValueError("dataset is empty")
        n = len(self.samples[0])
        for s in self.samples:
            if len(s) != n:
                raise ValueError(f"bitstring {s!r} has length {len(s)}, expected {n}")
            if set(s) - {"0", "1"}:
                raise ValueError(f"bitstring {s!r} contains characters other than 0/1")

    @property
    def n(self) -> int:
        return len(self.samples[0])

    @property
    def M(self) -> int:
        return len(self.samples)

    @property
    def counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for s in self.samples:
            out[s] = out.get(s, 0) + 1
        return out

    def probabilities(self) -> dict[str, float]:
        M = self.M
        return {s: c / M for s, c in self.counts.items()}

    @classmethod
    def from_file(cls, path) -> "Dataset":
        """Plain text, one bitstring per line; blank lines and '#' comments ignored."""
        samples = []
        with open(path) as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if set(line) - {"0", "1"}:
                    raise ValueError(f"{path}:{lineno}: invalid bitstring {line!r}")
                samples.append(line)
        if not samples:
            raise ValueError(f"{path}: no samples found")
        return cls(samples=tuple(samples))

    def to_file(self, path) -> None:
        with open(path, "w") as fh:
            for s in self.samples:
                fh.write(s + "\n")


@dataclass
class CorrelationMatrix:
    """Fermionic single-particle correlations Gamma_ij = <C_i^dag C_j> in the
    doubled basis C^dag = [c_1^dag .. c_n^dag, c_1 .. c_n]."""

    gamma: np.ndarray
    atol: float = field(default=1e-9, repr=False)

    def __post_init__(self):
        g = np.asarray(self.gamma, dtype=complex)
        if g.ndim != 2 or g.shape[0] != g.shape[1] or g.shape[0] % 2:
            raise ValueError(f"gamma must be 2n x 2n, got {g.shape}")
        if np.max(np.abs(g - g.conj().T)) > 1e-10:
            raise ValueError("gamma is not Hermitian within tolerance")
        w = scipy.linalg.eigvalsh(g)
        if w[0] < -self.atol or w[-1] > 1.0 + self.atol:
            raise ValueError(f"gamma spectrum [{w[0]:.3e}, {w[-1]:.3e}] outside [0, 1]")
        self.gamma = g

    @property
    def n(self) -> int:
        return self.gamma.shape[0] // 2

    def occupations(self) -> np.ndarray:
        return scipy.linalg.eigvalsh(self.gamma)


# ---------------------------------------------------------------------------
# XXZ chain target
# ---------------------------------------------------------------------------

def xxz_coupling(n: int, J: float, Delta: float, h_z: float,
                 periodic: bool = False) -> tuple[Ansatz, np.ndarray]:
    """Ansatz and coefficient vector of the XXZ chain Hamiltonian
    H = sum_edges J (XX + YY) + Delta ZZ + sum_i h_z Z_i (open by default)."""
    if n < 2:
        raise ValueError("XXZ chain needs n >= 2")
    terms, labels, theta = [], [], []
    for (i, j) in chain_edges(n, periodic):
        for axis, coeff in (("X", J), ("Y", J), ("Z", Delta)):
            terms.append(_pair(n, i, j, axis))
            labels.append(f"{axis}{i}{axis}{j}")
            theta.append(coeff)
    for i in range(n):
        terms.append(_single(n, i, "Z"))
        labels.append(f"Z{i}")
        theta.append(h_z)
    ansatz = Ansatz(n=n, terms=tuple(terms), labels=tuple(labels))
    return ansatz, np.array(theta)


def xxz_target(n: int, J: float = -0.5, Delta: float = -0.7, h_z: float = -0.8,
               periodic: bool = False) -> Target:
    """Gibbs state of the XXZ chain as a learning target."""
    ansatz, theta = xxz_coupling(n, J, Delta, h_z, periodic)
    model = gibbs_state(ansatz, theta)
    meta = {"kind": "xxz", "n": n, "J": J, "Delta": Delta, "h_z": h_z, "periodic": periodic}
    return Target.from_gibbs(model, meta=meta)


# ---------------------------------------------------------------------------
# Classical data encoding
# ---------------------------------------------------------------------------

def encode_dataset(dataset: Dataset) -> Target:
    """Pure-state encoding |psi> = sum_s sqrt(q(s)) |s>.

    Bitstring character 0 maps to the +1 eigenstate of Z, and the leftmost
    character is qubit 0, so the basis index of s is int(s, 2).
    """
    n = dataset.n
    psi = np.zeros(1 << n, dtype=complex)
    for s, q in dataset.probabilities().items():
        psi[int(s, 2)] = np.sqrt(q)
    meta = {"kind": "dataset", "n": n, "M": dataset.M}
    return Target.from_statevector(psi, dataset=dataset, meta=meta)


# ---------------------------------------------------------------------------
# Fermionic correlation matrices
# ---------------------------------------------------------------------------

def _doubled_operators(n: int) -> list[np.ndarray]:
    c = jw_annihilation_matrices(n)
    return [*c, *(ci.conj().T for ci in c)]


def correlation_matrix_of_density(rho: np.ndarray) -> CorrelationMatrix:
    """Gamma_ij = Tr[rho C_i^dag C_j] via dense Jordan-Wigner operators."""
    n = int(np.log2(rho.shape[0]))
    C = _doubled_operators(n)
    applied = [Ci @ rho for Ci in C]
    N = 2 * n
    gamma = np.empty((N, N), dtype=complex)
    for i in range(N):
        for j in range(N):
            gamma[i, j] = np.vdot(C[i], applied[j])
    gamma = 0.5 * (gamma + gamma.conj().T)
    return CorrelationMatrix(gamma=gamma)


def fermionic_correlations(target: Target) -> CorrelationMatrix:
    """Correlation matrix of the target under the Jordan-Wigner mapping.

    This matrix-contraction path carries the full Jordan-Wigner sign
    structure and is the reference implementation; the bitstring-sum path
    below omits parity signs and exists for cross-checking.
    """
    if target.psi is not None:
        n = target.n
        C = _doubled_operators(n)
        applied = [Ci @ target.psi for Ci in C]
        N = 2 * n
        gamma = np.empty((N, N), dtype=complex)
        for i in range(N):
            for j in range(N):
                gamma[i, j] = np.vdot(applied[i], applied[j])
        gamma = 0.5 * (gamma + gamma.conj().T)
        return CorrelationMatrix(gamma=gamma)
    if target.eta is None:
        raise ValueError("target has neither eta nor psi")
    return correlation_matrix_of_density(target.eta)


def _flip(s: str, i: int) -> str:
    return s[:i] + ("1" if s[i] == "0" else "0") + s[i + 1:]


def fermionic_correlations_from_counts(dataset: Dataset) -> np.ndarray:
    """Bitstring-sum correlation estimates without Jordan-Wigner signs.

    Entries are amplitude overlaps of the form
    sum_s sqrt(q(s) q(F_i F_j s)) times occupation factors, with the parity
    strings of the Fermionic operators dropped. Returned as a raw array
    (it is not guaranteed Hermitian-consistent with the signed path, and
    its use is limited to cross-checks against ``fermionic_correlations``).
    """
    n = dataset.n
    q = dataset.probabilities()
    N = 2 * n
    gamma = np.zeros((N, N), dtype=complex)

    def qv(s: str) -> float:
        return q.get(s, 0.0)

    occ = np.zeros(n)
    for s, qs in q.items():
        for i in range(n):
            occ[i] += qs * (s[i] == "1")
    for i in range(n):
        gamma[i, i] = occ[i]              # <c_i^dag c_i>
        gamma[n + i, n + i] = 1.0 - occ[i]  # <c_i c_i^dag>

    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            cdag_c = cdag_cdag = c_c = 0.0
            for s, qs in q.items():
                amp = np.sqrt(qs * qv(_flip(_flip(s, i), j)))
                if amp == 0.0:
                    continue
                si = s[i] == "1"
                sj = s[j] == "1"
                cdag_c += amp * (not si) * sj
                cdag_cdag += amp * (not si) * (not sj)
                c_c += amp * si * sj
            gamma[i, j] = cdag_c                    # <c_i^dag c_j>
            gamma[i, n + j] = cdag_cdag             # <c_i^dag c_j^dag>
            gamma[n + i, j] = c_c                   # <c_i c_j>
    # hole block off-diagonals via the anticommutator: <c_i c_j^dag> = -<c_j^dag c_i> for i != j
    for i in range(n):
        for j in range(n):
            if i != j:
                gamma[n + i, n + j] = -gamma[j, i]
    return gamma


# ---------------------------------------------------------------------------
# Synthetic datasets
# ---------------------------------------------------------------------------

def synth_dataset(n: int, M: int, seed: int, model: str = "pairwise_ising",
                  p: float = 0.5, scale: float = 0.5) -> Dataset:
    """Reproducible synthetic bitstring data.

    independent_bernoulli: i.i.d. bits with P(1) = p.
    pairwise_ising: exact draws from a random two-local classical Gibbs
    distribution, p(s) propto exp(sum_{i<j} J_ij s_i s_j + sum_i h_i s_i)
    with spins s = +-1 and couplings uniform in [-scale, scale], fully
    enumerated (n <= 12).
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    rng = np.random.default_rng(seed)
    if model == "independent_bernoulli":
        bits = (rng.random((M, n)) < p).astype(int)
        samples = tuple("".join(map(str, row)) for row in bits)
    elif model == "pairwise_ising":
        if n > ENUMERATION_CAP:
            raise ValueError(f"pairwise_ising enumeration capped at n={ENUMERATION_CAP}")
        J = rng.uniform(-scale, scale, size=(n, n))
        h = rng.uniform(-scale, scale, size=n)
        probs = pairwise_ising_probabilities(n, J, h)
        idx = rng.choice(1 << n, size=M, p=probs)
        samples = tuple(format(k, f"0{n}b") for k in idx)
    else:
        raise ValueError(f"unknown synthetic model {model!r}")
    return Dataset(samples=samples)


def pairwise_ising_probabilities(n: int, J: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Exact distribution over all 2^n bitstrings of the two-local model."""
    spins = 1 - 2 * np.array(list(itertools.product((0, 1), repeat=n)))  # +1 for bit 0
    energy = np.zeros(spins.shape[0])
    for i in range(n):
        for j in range(i + 1, n):
            energy += J[i, j] * spins[:, i] * spins[:, j]
        energy += h[i] * spins[:, i]
    w = np.exp(energy - energy.max())
    return w / w.sum()
