"""qbmlab: an exact, desk-scale laboratory for quantum Boltzmann machines.

Parameterized Gibbs states are built by dense diagonalization, trained by
(stochastic) gradient descent on the quantum relative entropy, and
pre-trained with mean-field, Gaussian-Fermionic, or geometrically local
strategies. Everything is seeded and reproducible.
"""

__version__ = "0.1.0"

from .calculus import (
    HessianRecord,
    ScanRecord,
    exp_derivative_kernel,
    gradient,
    hessian,
    hessian_spectrum_scan,
    scan_summary,
)
from .gibbs import (
    GibbsModel,
    Target,
    expectation,
    expectations,
    gibbs_state,
    hamiltonian_matrix,
    negative_entropy,
    relative_entropy,
    trace_distance,
)
from .operators import (
    Ansatz,
    FermionicQuadraticForm,
    PauliTerm,
    build_ansatz,
    full_pauli_basis,
    jw_annihilation_matrices,
    jw_quadratic_to_pauli,
    pauli_matrix,
)
from .pretrain import PretrainResult, embed, gf_fit, gl_fit, mf_fit
from .targets import (
    CorrelationMatrix,
    Dataset,
    encode_dataset,
    fermionic_correlations,
    fermionic_correlations_from_counts,
    synth_dataset,
    xxz_target,
)
from .trainer import (
    NoiseModel,
    TrainingAborted,
    TrainingConfig,
    TrainingTrace,
    lr_schedule,
    sgd_train,
    stochastic_gradient,
    theorem_bounds,
)

__all__ = [
    "__version__",
    "Ansatz", "PauliTerm", "FermionicQuadraticForm",
    "build_ansatz", "full_pauli_basis", "pauli_matrix",
    "jw_annihilation_matrices", "jw_quadratic_to_pauli",
    "GibbsModel", "Target", "gibbs_state", "hamiltonian_matrix",
    "expectation", "expectations", "relative_entropy", "trace_distance",
    "negative_entropy",
    "gradient", "hessian", "HessianRecord", "exp_derivative_kernel",
    "hessian_spectrum_scan", "scan_summary", "ScanRecord",
    "Dataset", "CorrelationMatrix", "xxz_target", "encode_dataset",
    "fermionic_correlations", "fermionic_correlations_from_counts",
    "synth_dataset",
    "PretrainResult", "mf_fit", "gf_fit", "gl_fit", "embed",
    "NoiseModel", "TrainingConfig", "TrainingTrace", "TrainingAborted",
    "stochastic_gradient", "lr_schedule", "sgd_train", "theorem_bounds",
]
