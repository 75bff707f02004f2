"""Kernel backend selection.

Set DUALPOSE_NUMBA=0 to force the pure-numpy path, DUALPOSE_NUMBA=1 to
require numba (import error if missing). Default "auto" uses numba when
importable. `build_kernels` exists so tests and benchmarks can hold both
backends in one process.
"""

import os
from types import SimpleNamespace

from . import kernels as _kernels


def _requested() -> bool | None:
    value = os.environ.get("DUALPOSE_NUMBA", "auto").strip().lower()
    if value in ("1", "on", "true", "yes"):
        return True
    if value in ("0", "off", "false", "no"):
        return False
    return None


def _numba_available() -> bool:
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def build_kernels(use_numba: bool) -> SimpleNamespace:
    """Return a namespace with the hot kernels, jitted or plain.

    The SMO solver has two equivalent forms: a vectorized one that is the
    numpy fallback and a loop one that compiles tighter; both implement the
    same selection rule and produce the same iterates.
    """
    ns = SimpleNamespace(backend="numba" if use_numba else "numpy")
    if use_numba:
        from numba import njit

        wrap = njit(cache=True, nogil=True)
        ns.lm_pnp = wrap(_kernels.lm_pnp)
        ns.pnp_residual_jacobian = wrap(_kernels.pnp_residual_jacobian)
        ns.smo_solve = wrap(_kernels.smo_solve_loops)
    else:
        ns.lm_pnp = _kernels.lm_pnp
        ns.pnp_residual_jacobian = _kernels.pnp_residual_jacobian
        ns.smo_solve = _kernels.smo_solve
    return ns


_req = _requested()
if _req is None:
    _use_numba = _numba_available()
elif _req and not _numba_available():
    raise ImportError("DUALPOSE_NUMBA=1 but numba is not importable")
else:
    _use_numba = _req

_active = build_kernels(_use_numba)

BACKEND: str = _active.backend
lm_pnp = _active.lm_pnp
pnp_residual_jacobian = _active.pnp_residual_jacobian
smo_solve = _active.smo_solve
