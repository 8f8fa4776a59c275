"""Hot-loop kernels with a compiled fast path and a numpy fallback.

The compiled extension is picked at import time when present; setting
MOMMIX_PURE_PYTHON=1 in the environment forces the numpy reference
implementation. ``set_backend`` swaps implementations at runtime, which the
benchmark and the backend-agreement tests use.
"""

import os

from . import reference as _reference

try:
    from . import _fast as _compiled
except ImportError:
    _compiled = None

_BACKENDS = {"python": _reference}
if _compiled is not None:
    _BACKENDS["compiled"] = _compiled

if os.environ.get("MOMMIX_PURE_PYTHON"):
    BACKEND = "python"
else:
    BACKEND = "compiled" if _compiled is not None else "python"


def available_backends():
    return tuple(sorted(_BACKENDS))


def set_backend(name):
    """Bind the module-level kernel functions to the named backend."""
    global BACKEND, moment_sums, profile_moments, em_estep
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r}; available: {available_backends()}")
    impl = _BACKENDS[name]
    BACKEND = name
    moment_sums = impl.moment_sums
    profile_moments = impl.profile_moments
    em_estep = impl.em_estep


set_backend(BACKEND)
