"""Kernel backend selection.

The hot loops (unit-capacity max flow, residual reachability, GF(2^8) region
arithmetic) exist twice: a Cython extension (``fastflow``) and a pure-Python
twin (``pyflow``) with identical semantics. The compiled backend is used when
importable; set ``MAXFLOWPROT_BACKEND=py`` or ``=c`` to force one.
"""

import os

_choice = os.environ.get("MAXFLOWPROT_BACKEND", "").strip().lower()

if _choice in ("py", "python", "pure"):
    from . import pyflow as _impl
elif _choice in ("c", "ext", "cython"):
    from . import fastflow as _impl  # raises if the extension was not built
else:
    try:
        from . import fastflow as _impl
    except ImportError:
        from . import pyflow as _impl

BACKEND = _impl.BACKEND
unit_max_flow = _impl.unit_max_flow
residual_reachable = _impl.residual_reachable
residual_coreachable = _impl.residual_coreachable
gf_axpy = _impl.gf_axpy
gf_scale = _impl.gf_scale


def backend_name():
    """Name of the active kernel backend: "c" or "python"."""
    return BACKEND
