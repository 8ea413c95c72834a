"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The backend is picked once at import time from ``AAKIT_NUMBA`` (see
:mod:`aakit._config`).  Both modules expose the same functions:

    project_simplex, project_simplex_columns, apg_batch,
    argmax_projections, householder_qr, svd_golub_kahan

``backend(name)`` returns a specific module, which the test-suite and the
backend benchmark use to compare the two paths.
"""

from aakit._config import numba_enabled

from . import _np

BACKEND = "numba" if numba_enabled() else "numpy"

if BACKEND == "numba":
    from . import _nb as _impl
else:
    _impl = _np


def backend(name=None):
    if name is None:
        return _impl
    if name == "numpy":
        return _np
    if name == "numba":
        from . import _nb

        return _nb
    raise ValueError(f"unknown backend {name!r}")


project_simplex = _impl.project_simplex
project_simplex_columns = _impl.project_simplex_columns
apg_batch = _impl.apg_batch
argmax_projections = _impl.argmax_projections
householder_qr = _impl.householder_qr
svd_golub_kahan = _impl.svd_golub_kahan
