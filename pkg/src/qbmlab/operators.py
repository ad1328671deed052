"""Pauli-string operators, the ansatz catalog, and the Jordan-Wigner map.

Conventions used throughout the package:

* Qubit 0 is the leftmost Kronecker factor, so the computational basis
  index of a bitstring ``s`` is ``int(s, 2)`` (qubit 0 is the most
  significant bit).
* The Jordan-Wigner lowering operator is
  ``c_i = (prod_{j<i} Z_j) (X_i + i Y_i) / 2``, which makes ``|1>`` the
  occupied state and ``c_i^dag c_i = (I - Z_i) / 2``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

DEFAULT_QUBIT_CAP = 12

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "Y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}

ANSATZ_KINDS = ("mean_field", "gl_1d", "gl_2d", "fully_connected")


@dataclass(frozen=True)
class PauliTerm:
    """One n-qubit Pauli string, e.g. ``"XIZ"`` for X_0 Z_2 on 3 qubits."""

    letters: str

    def __post_init__(self):
        if not self.letters:
            raise ValueError("empty Pauli string")
        bad = set(self.letters) - set("IXYZ")
        if bad:
            raise ValueError(f"invalid Pauli letters {sorted(bad)} in {self.letters!r}")

    @property
    def n(self) -> int:
        return len(self.letters)

    @property
    def weight(self) -> int:
        """Number of non-identity factors (the locality k)."""
        return sum(ch != "I" for ch in self.letters)

    def __str__(self) -> str:
        return self.letters


@dataclass(frozen=True)
class Ansatz:
    """Ordered set of distinct Pauli terms; parameter i couples to terms[i]."""

    n: int
    terms: tuple[PauliTerm, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        if len(self.terms) < 1:
            raise ValueError("ansatz needs at least one term")
        if len(self.labels) != len(self.terms):
            raise ValueError("labels and terms length mismatch")
        for t in self.terms:
            if t.n != self.n:
                raise ValueError(f"term {t} acts on {t.n} qubits, ansatz has n={self.n}")
        if len(set(self.terms)) != len(self.terms):
            raise ValueError("ansatz terms must be distinct")

    @property
    def m(self) -> int:
        return len(self.terms)

    def to_dict(self) -> dict:
        return {"n": self.n, "terms": [t.letters for t in self.terms], "labels": list(self.labels)}

    @classmethod
    def from_dict(cls, d: dict) -> "Ansatz":
        terms = tuple(PauliTerm(s) for s in d["terms"])
        labels = tuple(d.get("labels") or [t.letters for t in terms])
        return cls(n=int(d["n"]), terms=terms, labels=labels)


def _single(n: int, i: int, axis: str) -> PauliTerm:
    s = ["I"] * n
    s[i] = axis
    return PauliTerm("".join(s))


def _pair(n: int, i: int, j: int, axis: str) -> PauliTerm:
    s = ["I"] * n
    s[i] = axis
    s[j] = axis
    return PauliTerm("".join(s))


def _single_qubit_block(n: int) -> tuple[list[PauliTerm], list[str]]:
    terms, labels = [], []
    for i in range(n):
        for axis in "XYZ":
            terms.append(_single(n, i, axis))
            labels.append(f"{axis}{i}")
    return terms, labels


def _pair_block(n: int, edges: list[tuple[int, int]]) -> tuple[list[PauliTerm], list[str]]:
    terms, labels = [], []
    for (i, j) in edges:
        for axis in "XYZ":
            terms.append(_pair(n, i, j, axis))
            labels.append(f"{axis}{i}{axis}{j}")
    return terms, labels


def chain_edges(n: int, periodic: bool) -> list[tuple[int, int]]:
    """Nearest-neighbour edges of a 1D chain; the wrap edge only when it is new."""
    edges = [(i, i + 1) for i in range(n - 1)]
    if periodic and n > 2:
        edges.append((0, n - 1))
    return edges


def grid_edges(dims: tuple[int, int], periodic: tuple[bool, bool]) -> list[tuple[int, int]]:
    """Nearest-neighbour edges of an R x C grid, row-major site indexing.

    Wrap edges along an axis are added only when that axis is longer than 2,
    otherwise they would duplicate an existing edge.
    """
    rows, cols = dims
    per_r, per_c = periodic
    edges = []
    for r in range(rows):
        for c in range(cols - 1):
            edges.append((r * cols + c, r * cols + c + 1))
        if per_c and cols > 2:
            edges.append((r * cols, r * cols + cols - 1))
    for c in range(cols):
        for r in range(rows - 1):
            edges.append((r * cols + c, (r + 1) * cols + c))
        if per_r and rows > 2:
            edges.append((c, (rows - 1) * cols + c))
    return edges


def default_grid_dims(n: int) -> tuple[int, int]:
    """Most-square factorization of n, e.g. 8 -> (2, 4)."""
    for r in range(int(np.sqrt(n)), 0, -1):
        if n % r == 0:
            return (r, n // r)
    return (1, n)


def build_ansatz(
    kind: str,
    n: int,
    dims: tuple[int, int] | None = None,
    periodic: bool | tuple[bool, bool] | None = None,
) -> Ansatz:
    """Build one of the catalog ansaetze.

    mean_field       -> the 3n single-qubit terms {X_i, Y_i, Z_i}
    gl_1d            -> nearest-neighbour {XX, YY, ZZ} on a chain plus all
                        single-qubit terms; ``periodic`` defaults to True
    gl_2d            -> same on an R x C grid (``dims``, default the
                        most-square factorization); per-axis wrap defaults
                        to True only on axes longer than 2
    fully_connected  -> all pairs {X_iX_j, Y_iY_j, Z_iZ_j, i<j} plus all
                        single-qubit terms, m = 3n(n+1)/2
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if kind == "mean_field":
        terms, labels = _single_qubit_block(n)
    elif kind == "gl_1d":
        per = True if periodic is None else bool(periodic)
        pt, pl = _pair_block(n, chain_edges(n, per))
        st, sl = _single_qubit_block(n)
        terms, labels = pt + st, pl + sl
    elif kind == "gl_2d":
        if dims is None:
            dims = default_grid_dims(n)
        rows, cols = int(dims[0]), int(dims[1])
        if rows * cols != n or rows < 1 or cols < 1:
            raise ValueError(f"grid dims {dims} do not multiply to n={n}")
        if periodic is None:
            per = (rows > 2, cols > 2)
        elif isinstance(periodic, (tuple, list)):
            per = (bool(periodic[0]), bool(periodic[1]))
        else:
            per = (bool(periodic), bool(periodic))
        pt, pl = _pair_block(n, grid_edges((rows, cols), per))
        st, sl = _single_qubit_block(n)
        terms, labels = pt + st, pl + sl
    elif kind == "fully_connected":
        edges = list(itertools.combinations(range(n), 2))
        pt, pl = _pair_block(n, edges)
        st, sl = _single_qubit_block(n)
        terms, labels = pt + st, pl + sl
    else:
        raise ValueError(f"unknown ansatz kind {kind!r}, expected one of {ANSATZ_KINDS}")
    return Ansatz(n=n, terms=tuple(terms), labels=tuple(labels))


def full_pauli_basis(n: int) -> Ansatz:
    """All 4^n - 1 non-identity Pauli strings; only sensible for small n."""
    terms = tuple(
        PauliTerm("".join(p))
        for p in itertools.product("IXYZ", repeat=n)
        if any(ch != "I" for ch in p)
    )
    return Ansatz(n=n, terms=terms, labels=tuple(t.letters for t in terms))


def pauli_matrix(term: PauliTerm, cap: int = DEFAULT_QUBIT_CAP) -> np.ndarray:
    """Dense 2^n x 2^n matrix of a Pauli string, Kronecker product in qubit order."""
    if term.n > cap:
        raise ValueError(f"n={term.n} exceeds dense cap {cap}")
    mat = PAULI_MATRICES[term.letters[0]].copy()
    for ch in term.letters[1:]:
        mat = np.kron(mat, PAULI_MATRICES[ch])
    return mat


@lru_cache(maxsize=None)
def pauli_action(term: PauliTerm) -> tuple[np.ndarray, np.ndarray]:
    """Sparse realization ``P |k> = phase[k] |perm[k]>`` of a Pauli string.

    Every Pauli string has exactly one nonzero entry per column, so this
    pair of length-2^n arrays represents the matrix exactly and makes
    expectation values O(2^n) instead of O(4^n).
    """
    n = term.n
    dim = 1 << n
    idx = np.arange(dim)
    perm = idx.copy()
    phase = np.ones(dim, dtype=complex)
    for q, ch in enumerate(term.letters):
        if ch == "I":
            continue
        bit = (idx >> (n - 1 - q)) & 1
        if ch == "X":
            perm ^= 1 << (n - 1 - q)
        elif ch == "Y":
            perm ^= 1 << (n - 1 - q)
            phase = phase * np.where(bit == 0, 1.0j, -1.0j)
        else:
            phase = phase * np.where(bit == 0, 1.0, -1.0)
    perm.setflags(write=False)
    phase.setflags(write=False)
    return perm, phase


@lru_cache(maxsize=64)
def ansatz_action(ansatz: Ansatz) -> tuple[np.ndarray, np.ndarray]:
    """Stacked (m, 2^n) permutation/phase arrays for all ansatz terms."""
    perms, phases = zip(*(pauli_action(t) for t in ansatz.terms))
    perm = np.array(perms)
    phase = np.array(phases)
    perm.setflags(write=False)
    phase.setflags(write=False)
    return perm, phase


# ---------------------------------------------------------------------------
# Jordan-Wigner map of quadratic Fermionic forms
# ---------------------------------------------------------------------------

@dataclass
class FermionicQuadraticForm:
    """Quadratic form sum_ij Theta_ij C_i^dag C_j in the doubled operator
    basis C^dag = [c_1^dag .. c_n^dag, c_1 .. c_n]."""

    n: int
    theta_tilde: np.ndarray
    atol: float = field(default=1e-10, repr=False)

    def __post_init__(self):
        tt = np.asarray(self.theta_tilde, dtype=complex)
        if tt.shape != (2 * self.n, 2 * self.n):
            raise ValueError(f"theta_tilde must be {2*self.n}x{2*self.n}, got {tt.shape}")
        if np.max(np.abs(tt - tt.conj().T)) > self.atol:
            raise ValueError("theta_tilde is not Hermitian within tolerance")
        self.theta_tilde = tt


_PAULI_MUL = {
    ("I", "I"): (1.0, "I"), ("I", "X"): (1.0, "X"), ("I", "Y"): (1.0, "Y"), ("I", "Z"): (1.0, "Z"),
    ("X", "I"): (1.0, "X"), ("Y", "I"): (1.0, "Y"), ("Z", "I"): (1.0, "Z"),
    ("X", "X"): (1.0, "I"), ("Y", "Y"): (1.0, "I"), ("Z", "Z"): (1.0, "I"),
    ("X", "Y"): (1.0j, "Z"), ("Y", "X"): (-1.0j, "Z"),
    ("Y", "Z"): (1.0j, "X"), ("Z", "Y"): (-1.0j, "X"),
    ("Z", "X"): (1.0j, "Y"), ("X", "Z"): (-1.0j, "Y"),
}


def _mul_strings(s1: str, s2: str) -> tuple[complex, str]:
    phase = 1.0 + 0.0j
    out = []
    for a, b in zip(s1, s2):
        ph, c = _PAULI_MUL[(a, b)]
        phase *= ph
        out.append(c)
    return phase, "".join(out)


def _jw_lowering_strings(n: int, i: int) -> dict[str, complex]:
    head = "Z" * i
    tail = "I" * (n - i - 1)
    return {head + "X" + tail: 0.5, head + "Y" + tail: 0.5j}


def _dagger(op: dict[str, complex]) -> dict[str, complex]:
    return {s: w.conjugate() for s, w in op.items()}


def jw_annihilation_matrices(n: int, cap: int = DEFAULT_QUBIT_CAP) -> list[np.ndarray]:
    """Dense 2^n x 2^n matrices of the n Jordan-Wigner lowering operators."""
    out = []
    for i in range(n):
        op = _jw_lowering_strings(n, i)
        mat = sum(w * pauli_matrix(PauliTerm(s), cap=cap) for s, w in op.items())
        out.append(mat)
    return out


def jw_quadratic_to_pauli(
    form: FermionicQuadraticForm, tol: float = 1e-12
) -> tuple[list[tuple[PauliTerm, float]], float]:
    """Expand C^dag Theta C into real-weighted Pauli strings.

    Returns the deduplicated list of (term, weight) pairs sorted by string,
    plus the coefficient of the identity produced by the expansion. The
    identity shift is stripped from the term list because it never changes
    the Gibbs state built from the output.
    """
    n = form.n
    lowering = [_jw_lowering_strings(n, i) for i in range(n)]
    raising = [_dagger(op) for op in lowering]
    doubled = lowering + raising          # C_1 .. C_2n
    doubled_dag = raising + lowering      # C_1^dag .. C_2n^dag

    acc: dict[str, complex] = {}
    tt = form.theta_tilde
    for i in range(2 * n):
        for j in range(2 * n):
            w = tt[i, j]
            if abs(w) < 1e-16:
                continue
            for s1, w1 in doubled_dag[i].items():
                for s2, w2 in doubled[j].items():
                    ph, s = _mul_strings(s1, s2)
                    acc[s] = acc.get(s, 0.0) + w * w1 * w2 * ph

    identity = acc.pop("I" * n, 0.0)
    if abs(identity.imag) > 1e-9:
        raise ValueError("identity coefficient has a large imaginary part; input not Hermitian?")
    pairs = []
    for s in sorted(acc):
        w = acc[s]
        if abs(w) <= tol:
            continue
        if abs(w.imag) > 1e-9:
            raise ValueError(f"non-real weight {w} on {s}; input not Hermitian?")
        pairs.append((PauliTerm(s), float(w.real)))
    return pairs, float(identity.real)
