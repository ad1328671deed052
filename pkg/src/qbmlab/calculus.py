"""Analytic derivatives of the relative entropy and curvature diagnostics.

The gradient is the difference of model and target expectation values.
The Hessian is evaluated exactly in the Hamiltonian eigenbasis through the
spectral kernel of the derivative of a matrix exponential,
``fhat(w) = tanh(w/2) / (w/2)`` with ``fhat(0) = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gibbs import GibbsModel, Target, expectations
from .operators import ANSATZ_KINDS, ansatz_action, build_ansatz

# stable ids so scan seed streams do not depend on string hashing
_KIND_IDS = {kind: i for i, kind in enumerate(ANSATZ_KINDS)}


def gradient(model: GibbsModel, target: Target) -> np.ndarray:
    """g_i = <H_i>_model - <H_i>_target, one entry per ansatz term."""
    return expectations(model) - target.expectations_for(model.ansatz)


def exp_derivative_kernel(omega: np.ndarray) -> np.ndarray:
    """fhat(w) = tanh(w/2)/(w/2), continued with fhat(0) = 1."""
    omega = np.asarray(omega, dtype=float)
    out = np.ones_like(omega)
    mask = np.abs(omega) > 1e-12
    w = omega[mask]
    out[mask] = np.tanh(0.5 * w) / (0.5 * w)
    return out


@dataclass
class HessianRecord:
    theta: np.ndarray
    hess: np.ndarray
    min_eig: float
    max_eig: float


def hessian(model: GibbsModel) -> HessianRecord:
    """Exact Hessian of S(eta||rho_theta) with respect to theta.

    In the eigenbasis of H_theta with populations p_a,

        Hess_ij = Re sum_ab p_a fhat(l_b - l_a) (H_i)_ab (H_j)_ba
                  - <H_i><H_j>,

    symmetrized to remove floating-point asymmetry before eigenanalysis.
    The result does not depend on the target.
    """
    ansatz = model.ansatz
    m = ansatz.m
    V = model.eigvecs
    lam = model.eigvals
    p = model.probabilities
    dim = V.shape[0]

    perm, phase = ansatz_action(ansatz)
    A = np.empty((m, dim, dim), dtype=complex)
    Vh = V.conj().T
    for i in range(m):
        PV = np.empty_like(V)
        PV[perm[i]] = phase[i][:, None] * V
        A[i] = Vh @ PV

    kernel = p[:, None] * exp_derivative_kernel(lam[None, :] - lam[:, None])
    B = A.reshape(m, dim * dim)
    hess = ((B * kernel.ravel()) @ B.conj().T).real
    ev = np.einsum("kaa,a->k", A, p).real
    hess -= np.outer(ev, ev)
    hess = 0.5 * (hess + hess.T)

    eigs = np.linalg.eigvalsh(hess)
    return HessianRecord(theta=model.theta.copy(), hess=hess,
                         min_eig=float(eigs[0]), max_eig=float(eigs[-1]))


@dataclass
class ScanRecord:
    kind: str
    n: int
    mu: float
    instance: int
    min_eig: float
    max_eig: float


def _mu_key(mu: float) -> int:
    # IEEE bits of mu, so distinct scales never share a seed stream
    return int(np.float64(mu).view(np.uint64))


def scan_instance_seed(seed: int, kind: str, n: int, mu: float) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(seed), _KIND_IDS[kind], int(n), _mu_key(mu)])


def hessian_spectrum_scan(
    kind: str,
    n_list: list[int],
    mu: float,
    instances: int,
    seed: int,
    periodic: bool | None = False,
    cap: int = 12,
) -> list[ScanRecord]:
    """Smallest/largest Hessian eigenvalue over random parameter draws.

    Parameters are sampled uniformly in [-mu, mu]^m from per-instance
    substreams spawned off (seed, kind, n, mu). The chain/grid ansaetze
    default to open boundaries here, matching the random-coefficient
    ensembles this scan is meant to probe.
    """
    from .gibbs import gibbs_state  # local import keeps module load light

    records = []
    for n in n_list:
        if n > cap:
            raise ValueError(f"n={n} exceeds dense cap {cap}")
        ansatz = build_ansatz(kind, n, periodic=periodic)
        children = scan_instance_seed(seed, kind, n, mu).spawn(instances)
        for inst, child in enumerate(children):
            rng = np.random.default_rng(child)
            theta = rng.uniform(-mu, mu, size=ansatz.m)
            rec = hessian(gibbs_state(ansatz, theta))
            records.append(ScanRecord(kind=kind, n=n, mu=mu, instance=inst,
                                      min_eig=rec.min_eig, max_eig=rec.max_eig))
    return records


def scan_summary(records: list[ScanRecord]) -> dict:
    """Median and spread of the smallest eigenvalue per (kind, n, mu)."""
    groups: dict[tuple, list[ScanRecord]] = {}
    for r in records:
        groups.setdefault((r.kind, r.n, r.mu), []).append(r)
    out = {}
    for (kind, n, mu), recs in groups.items():
        mins = np.array([r.min_eig for r in recs])
        out[f"{kind}/n={n}/mu={mu}"] = {
            "median_min_eig": float(np.median(mins)),
            "std_min_eig": float(np.std(mins)),
            "min_min_eig": float(np.min(mins)),
            "max_max_eig": float(max(r.max_eig for r in recs)),
            "instances": len(recs),
        }
    return out
