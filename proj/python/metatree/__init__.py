"""Clustering of attributed tree populations.

Thin re-export of the compiled core: support-tree indexing, forest matrix
assembly and I/O, structure-constrained factorization, cone-space metrics,
spectral and K-means clustering, dataset simulation, and experiment runs.
"""

from ._core import *  # noqa: F401,F403
from ._core import __doc__ as _core_doc  # noqa: F401

__all__ = [name for name in dir() if not name.startswith("_")]
