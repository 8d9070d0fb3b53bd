"""MO-PaDGAN: a GAN with a performance-augmented DPP loss, used as a design
parameterization for multi-objective Bayesian optimization."""
from .dpp import QualityConfig, build_dpp_kernel, pad_loss, pad_loss_grads
from .gan import TrainConfig, generate, train
from .kernels import BACKEND
from .mobo import hypervolume_2d, non_dominated, optimize
from .problems import BenchmarkId, ClusterDataSpec, kno1, make_cluster_data, vlmop2

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BenchmarkId",
    "ClusterDataSpec",
    "QualityConfig",
    "TrainConfig",
    "build_dpp_kernel",
    "generate",
    "hypervolume_2d",
    "kno1",
    "make_cluster_data",
    "non_dominated",
    "optimize",
    "pad_loss",
    "pad_loss_grads",
    "train",
    "vlmop2",
]
