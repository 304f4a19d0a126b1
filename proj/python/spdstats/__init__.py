"""Statistics on symmetric positive definite matrices.

Thin wrapper around the compiled extension module.
"""

try:
    from ._spdstats import *  # noqa: F401,F403  (installed layout)
except ImportError:
    from _spdstats import *  # noqa: F401,F403  (build-tree layout)
