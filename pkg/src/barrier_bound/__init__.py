"""Barrier constructions, model-manifold fields and gradient-estimate audits.

The subpackages follow the pipeline order: :mod:`profiles` (equation data),
:mod:`geometry` (model manifolds and norms), :mod:`barriers` (comparison
curves), :mod:`pde` (certified fields), :mod:`verify` (audits) and
:mod:`scenario` / :mod:`cli` (declarative runs).
"""
from __future__ import annotations

from importlib.metadata import PackageNotFoundError, version

from .errors import (BarrierBoundError, ConfigError, ConstructionError, ConvergenceError, ConvexityError,
                     CoverageWarning, DomainError, EllipticityError, InvalidWarpError, MonotonicityError,
                     ParameterError, RangeError)

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # pragma: no cover - running from a source tree
    __version__ = "0.0.0"

__all__ = [
    "BarrierBoundError",
    "ConfigError",
    "ConstructionError",
    "ConvergenceError",
    "ConvexityError",
    "CoverageWarning",
    "DomainError",
    "EllipticityError",
    "InvalidWarpError",
    "MonotonicityError",
    "ParameterError",
    "RangeError",
    "__version__",
]
