"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise (or when
``REGSPEC_PURE_PYTHON=1`` is set) the pure-Python twins are used. ``BACKEND``
names whichever was picked.
"""
import os

from . import _kernels_py as python_backend

compiled_backend = None
if os.environ.get("REGSPEC_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as compiled_backend
    except ImportError:  # extension not built
        compiled_backend = None

_impl = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "compiled" if compiled_backend is not None else "python"

run_switch_chain = _impl.run_switch_chain
sturm_count = _impl.sturm_count
tridiag_bisect = _impl.tridiag_bisect
tql1 = _impl.tql1
