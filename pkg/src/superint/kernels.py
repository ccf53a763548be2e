"""Backend selection for the numeric hot loops.

The compiled extension is used when it was built; set ``SUPERINT_PURE_PYTHON=1``
to force the pure-Python implementation.
"""
import os

if os.environ.get("SUPERINT_PURE_PYTHON") == "1":
    from . import _kernels_py as _impl
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
        BACKEND = "cython"
    except ImportError:
        from . import _kernels_py as _impl
        BACKEND = "python"

eval_table = _impl.eval_table
rk4_run = _impl.rk4_run


def backend(name: str):
    """Return the kernel module for ``"cython"`` or ``"python"`` explicitly."""
    if name == "python":
        from . import _kernels_py
        return _kernels_py
    if name == "cython":
        from . import _kernels  # type: ignore[attr-defined]
        return _kernels
    raise ValueError(f"unknown backend {name!r}")
