"""Pre-training strategies on parameter subsets, and embedding of the
pre-trained vector into a larger ansatz.

All strategies effectively start from theta = 0 (the maximally mixed
state), so the relative entropy they achieve can never exceed the
maximally-mixed baseline n ln 2 + Tr[eta ln eta].
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .calculus import gradient
from .gibbs import Target, gibbs_state, relative_entropy
from .operators import Ansatz, FermionicQuadraticForm, PauliTerm, build_ansatz, jw_quadratic_to_pauli
from .targets import CorrelationMatrix, correlation_matrix_of_density

CLAMP = 1e-6  # regularization of artanh / inverse-sigmoid divergences


@dataclass
class PretrainResult:
    """Outcome of one pre-training strategy on a parameter subset."""

    method: str
    sub_ansatz: Ansatz
    chi: np.ndarray
    achieved_entropy: float | None
    iterations: int
    hit_cap: bool = False
    theta_tilde: np.ndarray | None = field(default=None, repr=False)
    identity_shift: float = 0.0
    entropy_trace: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "chi": [float(x) for x in self.chi],
            "terms": [t.letters for t in self.sub_ansatz.terms],
            "achieved_entropy": self.achieved_entropy,
            "iterations": self.iterations,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PretrainResult":
        terms = tuple(PauliTerm(s) for s in d["terms"])
        sub = Ansatz(n=terms[0].n, terms=terms, labels=tuple(t.letters for t in terms))
        return cls(method=d["method"], sub_ansatz=sub, chi=np.array(d["chi"], dtype=float),
                   achieved_entropy=d.get("achieved_entropy"), iterations=int(d["iterations"]))


def mf_fit(target: Target) -> PretrainResult:
    """Closed-form mean-field fit.

    Per qubit, theta = b * artanh(r) / r where b is the Bloch vector of the
    target marginal and r its norm. Bloch norms at (or numerically above) 1
    are clamped to 1 - 1e-6 before the artanh, which diverges there.
    """
    n = target.n
    ansatz = build_ansatz("mean_field", n)
    chi = np.zeros(ansatz.m)
    for i in range(n):
        bloch = np.array([target.expectation_of(t) for t in ansatz.terms[3 * i: 3 * i + 3]])
        r = float(np.linalg.norm(bloch))
        if r > 1.0 + 1e-9:
            raise ValueError(f"qubit {i}: Bloch norm {r:.12f} exceeds 1; inconsistent expectations")
        if r == 0.0:
            continue
        r_eff = min(r, 1.0 - CLAMP)
        chi[3 * i: 3 * i + 3] = bloch * (np.arctanh(r_eff) / r)
    achieved = relative_entropy(target, gibbs_state(ansatz, chi))
    return PretrainResult(method="mean_field", sub_ansatz=ansatz, chi=chi,
                          achieved_entropy=achieved, iterations=0)


def gf_fit(gamma: CorrelationMatrix, target: Target | None = None,
           verify: bool = True, verify_atol: float = 1e-5) -> PretrainResult:
    """Closed-form Gaussian-Fermionic fit from the correlation matrix.

    Diagonalizes Gamma = W L W^dag, clamps the occupation spectrum to
    [1e-6, 1 - 1e-6], and sets the quadratic-form coefficients to
    (1/2) [W ln(L/(1-L)) W^dag]^T. The transpose is required for the
    rebuilt Gibbs state to reproduce Gamma when Gamma is complex; it is a
    no-op for real correlation matrices. The quadratic form is then pushed
    through the Jordan-Wigner map to obtain the Pauli sub-ansatz.
    """
    n = gamma.n
    lam, W = scipy.linalg.eigh(gamma.gamma)
    lam_c = np.clip(lam, CLAMP, 1.0 - CLAMP)
    inv_sigmoid = np.log(lam_c / (1.0 - lam_c))
    theta_tilde = 0.5 * ((W * inv_sigmoid) @ W.conj().T).T
    form = FermionicQuadraticForm(n=n, theta_tilde=theta_tilde)
    pairs, shift = jw_quadratic_to_pauli(form)
    if not pairs:  # Gamma = I/2 maps to the zero form; keep a zero-weight placeholder
        pairs = [(PauliTerm("Z" + "I" * (n - 1)), 0.0)]
    terms = tuple(t for t, _ in pairs)
    chi = np.array([w for _, w in pairs])
    sub = Ansatz(n=n, terms=terms, labels=tuple(t.letters for t in terms))
    model = gibbs_state(sub, chi)
    if verify:
        rebuilt = correlation_matrix_of_density(model.rho).gamma
        dev = float(np.max(np.abs(rebuilt - gamma.gamma)))
        # the clamp itself moves extremal occupations by up to CLAMP
        if dev > max(verify_atol, 10 * CLAMP):
            raise ValueError(f"rebuilt correlation matrix deviates by {dev:.2e}")
    achieved = relative_entropy(target, model) if target is not None else None
    return PretrainResult(method="gaussian_fermionic", sub_ansatz=sub, chi=chi,
                          achieved_entropy=achieved, iterations=0,
                          theta_tilde=theta_tilde, identity_shift=shift)


def gl_fit(target: Target, ansatz: Ansatz, gamma_lr: float | None = None,
           stop_tol: float = 0.01, max_iters: int = 100_000,
           method: str = "gl") -> PretrainResult:
    """Exact gradient descent on the sub-ansatz, starting from chi = 0.

    The default learning rate 1/m keeps every step non-increasing in
    relative entropy (the smoothness constant of the restricted problem is
    2m for Pauli terms). Stops when the gradient infinity-norm falls below
    ``stop_tol``; if the iteration cap is hit the result is returned with
    ``hit_cap`` set.
    """
    if gamma_lr is None:
        gamma_lr = 1.0 / ansatz.m
    chi = np.zeros(ansatz.m)
    trace = []
    iterations = 0
    hit_cap = False
    while True:
        model = gibbs_state(ansatz, chi)
        trace.append(relative_entropy(target, model))
        g = gradient(model, target)
        if np.max(np.abs(g)) <= stop_tol:
            break
        if iterations >= max_iters:
            hit_cap = True
            warnings.warn(f"gl_fit hit the iteration cap {max_iters} "
                          f"(grad inf-norm {np.max(np.abs(g)):.3e})")
            break
        chi = chi - gamma_lr * g
        iterations += 1
    return PretrainResult(method=method, sub_ansatz=ansatz, chi=chi,
                          achieved_entropy=trace[-1], iterations=iterations,
                          hit_cap=hit_cap, entropy_trace=np.array(trace))


def embed(pre: PretrainResult, extension_terms: list[PauliTerm]) -> tuple[Ansatz, np.ndarray]:
    """Extend the pre-trained sub-ansatz with additional terms at weight 0.

    Extension terms that duplicate a pre-trained term are dropped with a
    warning (the pre-trained coefficient is kept). The embedded model is
    the same state, so its relative entropy equals ``achieved_entropy``.
    """
    sub = pre.sub_ansatz
    seen = set(sub.terms)
    terms = list(sub.terms)
    labels = list(sub.labels)
    dropped = 0
    for t in extension_terms:
        if t in seen:
            dropped += 1
            continue
        seen.add(t)
        terms.append(t)
        labels.append(t.letters)
    if dropped:
        warnings.warn(f"embed dropped {dropped} extension terms already present in the sub-ansatz")
    full = Ansatz(n=sub.n, terms=tuple(terms), labels=tuple(labels))
    theta0 = np.concatenate([pre.chi, np.zeros(full.m - sub.m)])
    return full, theta0
