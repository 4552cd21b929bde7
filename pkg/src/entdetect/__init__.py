"""Entanglement detection toolkit: exact PPT/negativity oracle, seeded
random state families, from-scratch MLP training, and scripted
reproductions of the two- and three-qubit classification experiments."""

from .nn import (
    MlpModel,
    RunMetrics,
    TrainConfig,
    asr,
    fit,
    forward,
    glorot_uniform_init,
    load_model,
    save_model,
)
from .pipeline import assemble, batches, featurize_density, featurize_purevec
from .qlinalg import (
    DensityMatrix,
    PureState,
    hermitian_eigenvalues,
    kron,
    negativity,
    negativity_per_qubit,
    numerical_rank,
    partial_transpose,
    purity,
    trace_norm,
)
from .stategen import (
    Dataset,
    GenSpec,
    build_dataset,
    read_dataset,
    write_dataset,
)
from .experiments import run_experiment

__version__ = "0.1.0"
__all__ = [
    "MlpModel",
    "RunMetrics",
    "TrainConfig",
    "asr",
    "fit",
    "forward",
    "glorot_uniform_init",
    "load_model",
    "save_model",
    "assemble",
    "batches",
    "featurize_density",
    "featurize_purevec",
    "DensityMatrix",
    "PureState",
    "hermitian_eigenvalues",
    "kron",
    "negativity",
    "negativity_per_qubit",
    "numerical_rank",
    "partial_transpose",
    "purity",
    "trace_norm",
    "Dataset",
    "GenSpec",
    "build_dataset",
    "read_dataset",
    "write_dataset",
    "run_experiment",
    "__version__",
]
