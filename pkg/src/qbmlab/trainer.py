"""Stochastic gradient descent on the relative entropy, with the noise
models, learning-rate schedules, and iteration/sample-count calculators.

Convergence is declared on the exact maximum expectation error, which the
dense simulator provides as a side channel; the noisy estimates drive the
updates only. The random stream is consumed in a documented order (model
side first, then data side) so identical configs and seeds give identical
traces.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .gibbs import GibbsModel, Target, expectations, gibbs_state
from .operators import Ansatz
from .targets import Dataset, encode_dataset

NOISE_KINDS = ("exact", "gaussian", "sampling")
SCHEDULE_KINDS = ("constant", "custom", "thm1", "thm2_step")


class TrainingAborted(RuntimeError):
    """Raised when parameters become non-finite (learning-rate blow-up)."""

    def __init__(self, t: int, message: str):
        super().__init__(message)
        self.t = t


@dataclass
class NoiseModel:
    """Gradient noise: exact, Gaussian with model/data stds (kappa, xi), or
    finite-shot sampling on the model side."""

    kind: str
    kappa: float = 0.0
    xi: float = 0.0
    shots: int = 0

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.kappa < 0 or self.xi < 0:
            raise ValueError("kappa and xi must be >= 0")
        if self.kind == "exact" and (self.kappa != 0 or self.xi != 0):
            raise ValueError("exact noise requires kappa = xi = 0")
        if self.kind == "sampling" and self.shots < 1:
            raise ValueError("sampling noise requires shots >= 1")

    @property
    def power(self) -> float:
        """Combined variance kappa^2 + xi^2."""
        return self.kappa ** 2 + self.xi ** 2

    @classmethod
    def exact(cls) -> "NoiseModel":
        return cls(kind="exact")

    @classmethod
    def gaussian(cls, kappa: float, xi: float) -> "NoiseModel":
        return cls(kind="gaussian", kappa=kappa, xi=xi)

    @classmethod
    def sampling(cls, shots: int, xi: float = 0.0) -> "NoiseModel":
        return cls(kind="sampling", shots=shots, xi=xi)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "kappa": self.kappa, "xi": self.xi, "shots": self.shots}


def lr_schedule(kind: str, params: dict, t: int) -> float:
    """Learning rate at iteration t.

    constant/custom : params["gamma"]
    thm1            : min(1/(2m), epsilon / (4 m^2 (kappa^2 + xi^2))); the
                      1/(2m) cap is the smoothness bound and applies when
                      the noise power is small or zero
    thm2_step       : two-phase scheme with params a, b, T: 1/b while
                      T <= b/a or t < ceil(T/2), then 2/(a(s + t - k0))
                      with s = 2b/a
    """
    if kind in ("constant", "custom"):
        try:
            return float(params["gamma"])
        except KeyError:
            raise ValueError("constant schedule needs params['gamma']") from None
    if kind == "thm1":
        try:
            eps = float(params["epsilon"])
            m = int(params["m"])
            power = float(params["noise_power"])
        except KeyError as exc:
            raise ValueError(f"thm1 schedule missing param {exc}") from None
        cap = 1.0 / (2 * m)
        if power <= 0.0:
            return cap
        return min(cap, eps / (4.0 * m * m * power))
    if kind == "thm2_step":
        try:
            a = float(params["a"])
            b = float(params["b"])
            T = int(params["T"])
        except KeyError as exc:
            raise ValueError(f"thm2_step schedule missing param {exc}") from None
        k0 = math.ceil(T / 2)
        if T <= b / a or t < k0:
            return 1.0 / b
        s = 2.0 * b / a
        return 2.0 / (a * (s + t - k0))
    raise ValueError(f"unknown schedule kind {kind!r}, expected one of {SCHEDULE_KINDS}")


def _model_estimate(mvec: np.ndarray, noise: NoiseModel, rng: np.random.Generator) -> np.ndarray:
    if noise.kind == "gaussian" and noise.kappa > 0:
        return mvec + rng.normal(0.0, noise.kappa, size=mvec.shape)
    if noise.kind == "sampling":
        p_plus = np.clip(0.5 * (1.0 + mvec), 0.0, 1.0)
        hits = rng.binomial(noise.shots, p_plus)
        return 2.0 * hits / noise.shots - 1.0
    return mvec


def _data_estimate(tvec: np.ndarray, target: Target, ansatz: Ansatz,
                   noise: NoiseModel, rng: np.random.Generator) -> np.ndarray:
    if noise.kind == "gaussian" and noise.xi > 0:
        return tvec + rng.normal(0.0, noise.xi, size=tvec.shape)
    if noise.kind == "sampling" and noise.xi > 0 and target.dataset is not None:
        batch_size = math.ceil(1.0 / noise.xi ** 2)
        idx = rng.integers(0, target.dataset.M, size=batch_size)
        batch = Dataset(samples=tuple(target.dataset.samples[i] for i in idx))
        return encode_dataset(batch).expectations_for(ansatz)
    return tvec


def stochastic_gradient(model: GibbsModel, target: Target, noise: NoiseModel,
                        rng: np.random.Generator) -> np.ndarray:
    """One draw of the unbiased gradient estimate g_i = h_i,model - h_i,data.

    exact    : the analytic gradient, bit for bit
    gaussian : analytic gradient plus independent N(0, kappa^2) per
               component on the model side and N(0, xi^2) on the data side
    sampling : model side is the mean of `shots` +-1 draws per term with
               P(+1) = (1 + <H_i>)/2; data side is exact, or a mini-batch
               of ceil(1/xi^2) samples when the target carries a dataset
               and xi > 0

    Draw order per call: model side first, then data side.
    """
    mvec = expectations(model)
    tvec = target.expectations_for(model.ansatz)
    est_m = _model_estimate(mvec, noise, rng)
    est_d = _data_estimate(tvec, target, model.ansatz, noise, rng)
    return est_m - est_d


@dataclass
class TrainingConfig:
    ansatz: Ansatz
    theta0: np.ndarray
    target: Target
    noise: NoiseModel
    schedule: dict
    epsilon: float
    max_iters: int
    seed: int
    record_every: int = 1
    record_theta: bool = False

    def __post_init__(self):
        self.theta0 = np.asarray(self.theta0, dtype=float)
        if self.theta0.shape != (self.ansatz.m,):
            raise ValueError(f"theta0 must have length m={self.ansatz.m}")
        if not np.all(np.isfinite(self.theta0)):
            raise ValueError("theta0 contains non-finite entries")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be > 0")
        if self.max_iters < 0:
            raise ValueError("max_iters must be >= 0")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        kind = self.schedule.get("kind")
        if kind not in SCHEDULE_KINDS:
            raise ValueError(f"unknown schedule kind {kind!r}")
        if kind == "thm1" and self.noise.power < self.epsilon / (2 * self.ansatz.m):
            warnings.warn(
                "noise power kappa^2 + xi^2 below epsilon/(2m): the constant-rate "
                "iteration bound does not apply; the 1/(2m) cap will be used")

    def resolved_schedule(self) -> tuple[str, dict]:
        kind = self.schedule["kind"]
        params = {k: v for k, v in self.schedule.items() if k != "kind"}
        if kind == "thm1":
            params.setdefault("epsilon", self.epsilon)
            params.setdefault("m", self.ansatz.m)
            params.setdefault("noise_power", self.noise.power)
        return kind, params


@dataclass
class TrainingTrace:
    """Per-recorded-iteration history plus run summary."""

    t: np.ndarray
    S: np.ndarray
    max_abs_error: np.ndarray
    grad_norm: np.ndarray
    gamma: np.ndarray
    final_theta: np.ndarray
    converged: bool
    converged_at: int | None
    iterations: int
    best_t: int
    best_max_error: float
    theta_snapshots: list[np.ndarray] | None = None

    CSV_HEADER = ("t", "S", "max_abs_error", "grad_norm", "gamma")

    def rows(self):
        for k in range(len(self.t)):
            yield (int(self.t[k]), self.S[k], self.max_abs_error[k],
                   self.grad_norm[k], self.gamma[k])

    def write_csv(self, path) -> None:
        with open(path, "w", newline="\n") as fh:
            fh.write(",".join(self.CSV_HEADER) + "\n")
            for row in self.rows():
                fh.write(",".join(_csv_cell(v) for v in row) + "\n")

    def summary(self) -> dict:
        return {
            "converged": self.converged,
            "converged_at": self.converged_at,
            "iterations": self.iterations,
            "best_t": self.best_t,
            "best_max_error": self.best_max_error,
            "final_S": float(self.S[-1]),
        }


def _csv_cell(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def sgd_train(config: TrainingConfig) -> TrainingTrace:
    """Run theta^{t+1} = theta^t - gamma_t g_hat until the exact maximum
    expectation error falls to epsilon or the iteration cap is reached.

    The error is evaluated (and convergence checked) at every iteration
    including t = 0; rows are recorded every ``record_every`` iterations
    and always at the final iteration. Deterministic given the seed.
    """
    ansatz = config.ansatz
    target = config.target
    noise = config.noise
    rng = np.random.default_rng(config.seed)
    kind, params = config.resolved_schedule()
    tvec = target.expectations_for(ansatz)
    if target.eta_entropy is None:
        raise ValueError("target lacks eta_entropy")

    theta = config.theta0.copy()
    cols: list[tuple] = []
    snapshots: list[np.ndarray] | None = [] if config.record_theta else None
    converged = False
    converged_at = None

    t = 0
    while True:
        model = gibbs_state(ansatz, theta)
        mvec = expectations(model)
        diff = mvec - tvec
        err = float(np.max(np.abs(diff)))
        S = float(target.eta_entropy - theta @ tvec + model.log_Z)
        gamma_t = lr_schedule(kind, params, t)
        if err <= config.epsilon:
            converged = True
            converged_at = t
        last = converged or t >= config.max_iters
        if t % config.record_every == 0 or last:
            cols.append((t, S, err, float(np.linalg.norm(diff)), gamma_t))
            if snapshots is not None:
                snapshots.append(theta.copy())
        if last:
            break
        est_m = _model_estimate(mvec, noise, rng)
        est_d = _data_estimate(tvec, target, ansatz, noise, rng)
        theta = theta - gamma_t * (est_m - est_d)
        t += 1
        # the magnitude guard keeps H_theta representable for the eigensolver
        if not np.all(np.isfinite(theta)) or np.max(np.abs(theta)) > 1e100:
            raise TrainingAborted(
                t, f"non-finite or overflowing parameters at iteration {t}; "
                   f"likely learning-rate blow-up (gamma was {gamma_t:.3e})")

    arr = np.array(cols, dtype=float)
    errors = arr[:, 2]
    best_k = int(np.argmin(errors))
    return TrainingTrace(
        t=arr[:, 0].astype(int), S=arr[:, 1], max_abs_error=errors,
        grad_norm=arr[:, 3], gamma=arr[:, 4], final_theta=theta,
        converged=converged, converged_at=converged_at, iterations=t,
        best_t=int(arr[best_k, 0]), best_max_error=float(errors[best_k]),
        theta_snapshots=snapshots)


def theorem_bounds(m: int, kappa: float, xi: float, epsilon: float, delta0: float,
                   alpha: float | None = None, lambda_success: float = 0.99,
                   k_locality: int | None = None) -> dict:
    """Closed-form iteration and Gibbs-sample-count calculators.

    T_thm1 = 48 delta0 m^2 (kappa^2 + xi^2) / epsilon^4 with constant rate
    gamma = min(1/(2m), epsilon/(4 m^2 (kappa^2+xi^2))); T_thm2 =
    18 m^2 (kappa^2+xi^2) / (alpha^2 epsilon^2) when a strong-convexity
    constant is supplied. The per-iteration sample counts N are big-O
    expressions evaluated with unit constants and are order-of-magnitude
    only.
    """
    power = kappa ** 2 + xi ** 2
    notes = []
    if power < epsilon / (2 * m):
        msg = "noise power below epsilon/(2m): constant-rate bound precondition violated"
        warnings.warn(msg)
        notes.append(msg)
    T1 = 48.0 * delta0 * m * m * power / epsilon ** 4
    cap = 1.0 / (2 * m)
    uncapped = epsilon / (4.0 * m * m * power) if power > 0 else float("inf")
    gamma1 = min(cap, uncapped)
    if cap < uncapped:
        notes.append("learning rate capped at the smoothness bound 1/(2m)")
    out = {
        "T_thm1": T1,
        "gamma_thm1": gamma1,
        "T_thm2": None,
        "N_pauli": None,
        "N_klocal": None,
        "notes": notes + ["sample counts use unit constants; order of magnitude only"],
    }
    if alpha is not None:
        out["T_thm2"] = 18.0 * m * m * power / (alpha ** 2 * epsilon ** 2)
    if kappa > 0:
        T_for_split = max(T1, 1.0)
        one_minus = -math.expm1(math.log(lambda_success) / T_for_split)
        log_term = math.log(m / one_minus)
        out["N_pauli"] = log_term / kappa ** 4
        if k_locality is not None:
            out["N_klocal"] = (3.0 ** k_locality) * log_term / kappa ** 2
    return out
