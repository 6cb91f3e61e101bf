"""Distribution-free independence tests for synchronously driven linear systems."""

from .depmeasure import (
    DistanceCovariance,
    GaussianKernel,
    Hsic,
    LinearKernel,
    PairedSample,
    dcov_sq,
    estimate,
    hsic_v,
)
from .linsys import ArxStructure, TransferModel, residuals, simulate
from .ranktest import RankConfig, TestReport, iid_independence_test
from .robusttest import RobustConfig, RobustReport, SystemPair, run_robust_test
from .spsconf import ConfidenceGrid, SpsConfig, sps_region, stability_axis

__version__ = "0.1.0"

__all__ = [
    "ArxStructure",
    "ConfidenceGrid",
    "DistanceCovariance",
    "GaussianKernel",
    "Hsic",
    "LinearKernel",
    "PairedSample",
    "RankConfig",
    "RobustConfig",
    "RobustReport",
    "SpsConfig",
    "SystemPair",
    "TestReport",
    "__version__",
    "dcov_sq",
    "estimate",
    "hsic_v",
    "iid_independence_test",
    "residuals",
    "run_robust_test",
    "simulate",
    "sps_region",
    "stability_axis",
]
