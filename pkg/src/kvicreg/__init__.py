"""Kernel VICReg: the VICReg self-supervised objective computed in an RKHS."""

from ._backend import NAME as BACKEND
from .kernels import (
    CrossGramMatrix,
    GramMatrix,
    KernelSpec,
    cross_gram,
    double_center,
    gram,
    kernel_eval,
    resolve_bandwidth,
)
from .linalg import EigenDecomposition, frobenius_sq, symmetric_eig, trace
from .loss import (
    LossGradients,
    LossReport,
    LossWeights,
    euclidean_covariance,
    euclidean_invariance,
    euclidean_variance,
    euclidean_vicreg_grad,
    euclidean_vicreg_loss,
    kernel_covariance,
    kernel_invariance,
    kernel_variance,
    kernel_vicreg_grad,
    kernel_vicreg_loss,
)

__version__ = "0.1.0"
