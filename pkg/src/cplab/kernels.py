"""Backend selection for the hot kernels.

The compiled extension ``cplab._kernels`` is used when it imports; otherwise
the pure-Python twin in ``cplab._kernels_py`` is used. Setting
``CPLAB_PURE_PYTHON=1`` forces the fallback.
"""

import os

from . import _kernels_py

if os.environ.get("CPLAB_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = "python" if _impl is _kernels_py else "cython"

bridge_prox = _impl.bridge_prox
cd_lasso = _impl.cd_lasso
prox_grad = _impl.prox_grad
dp_suffix = _impl.dp_suffix

__all__ = ["BACKEND", "bridge_prox", "cd_lasso", "prox_grad", "dp_suffix"]
