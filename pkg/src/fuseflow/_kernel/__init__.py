"""Flow-kernel backend selection.

The compiled Cython kernel is used when its extension module built; the
pure-Python twin is the fallback. Selection happens once at import and
can be forced with the FUSEFLOW_BACKEND environment variable or at
runtime through set_default_backend (used by the benchmark CLI to time
both implementations).
"""

import os

from . import _maxflow_py

try:
    from . import _maxflow as _compiled
except ImportError:
    _compiled = None

HAVE_COMPILED = _compiled is not None


def available_backends():
    return ("compiled", "python") if HAVE_COMPILED else ("python",)


def get_kernel(name=None):
    """Resolve a backend name ('compiled', 'python', 'auto'/None) to a module."""
    if name in (None, "auto"):
        name = _default
    if name == "python":
        return _maxflow_py
    if name == "compiled":
        if _compiled is None:
            raise ValueError("compiled flow kernel is not available in this install")
        return _compiled
    raise ValueError(f"unknown flow kernel backend {name!r}")


def default_backend():
    return _default


def set_default_backend(name):
    """Set the process-wide default backend; returns the previous name."""
    global _default
    if name not in available_backends():
        raise ValueError(
            f"backend {name!r} not available (have {available_backends()})"
        )
    previous = _default
    _default = name
    return previous


_env = os.environ.get("FUSEFLOW_BACKEND", "").strip().lower()
if _env in ("compiled", "python"):
    _default = _env
    if _env == "compiled" and not HAVE_COMPILED:
        _default = "python"
else:
    _default = "compiled" if HAVE_COMPILED else "python"
