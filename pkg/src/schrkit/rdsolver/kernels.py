"""Backend selection for the stepping kernels.

The compiled extension is preferred when importable; otherwise the NumPy
implementation is used.  Set SCHRKIT_PURE_PYTHON=1 to force the fallback.
Both backends expose the same functions and status codes (documented in
_kernels_py).
"""

from __future__ import annotations

import os

import numpy as np

from ..kinetics import ModelParams

if os.environ.get("SCHRKIT_PURE_PYTHON", "0") not in ("", "0"):
    from . import _kernels_py as _impl
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
        BACKEND = "compiled"
    except ImportError:
        from . import _kernels_py as _impl
        BACKEND = "python"

STATUS_OK = _impl.STATUS_OK
STATUS_NEGATIVE = _impl.STATUS_NEGATIVE
STATUS_NONFINITE = _impl.STATUS_NONFINITE

run_explicit = _impl.run_explicit
run_imex = _impl.run_imex
run_forced_heat = _impl.run_forced_heat


def get_backend() -> str:
    """Name of the active kernel backend: 'compiled' or 'python'."""
    return BACKEND


def pack_params(p: ModelParams) -> np.ndarray:
    """Pack rate constants into the flat vector the kernels consume."""
    return np.array([
        p.lambda_recruit, p.beta,
        p.eta1, p.eta2, p.eta3, p.eta4,
        p.sigma, p.gamma1, p.gamma2,
        p.eta5, p.eta6, p.gamma3, p.gamma4,
        p.mu1, p.mu2, p.kappa1, p.kappa2,
    ], dtype=float)
