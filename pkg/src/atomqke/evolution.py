"""Stepped Schrödinger propagation, compiled when available.

``evolve_stepped_blocked`` is the hot kernel: the Cython build is picked
up when present, otherwise the numpy twin takes over with identical
results.  ``evolve_stepped_dense`` is the assumption-free eigendecomposition
reference used for cross-checking; it always runs in numpy.
``COMPILED`` reports which blocked implementation is active.
"""

from ._evolution_py import evolve_stepped_dense

try:
    from ._evolution import evolve_stepped_blocked

    COMPILED = True
except ImportError:  # pragma: no cover - depends on the build environment
    from ._evolution_py import evolve_stepped_blocked

    COMPILED = False

__all__ = ["evolve_stepped_blocked", "evolve_stepped_dense", "COMPILED"]
