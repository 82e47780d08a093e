"""Hot-kernel dispatch: compiled extension when available, NumPy fallback.

Backend selection, decided once at import:
  * STAR_KERNELS=native  require the compiled module (ImportError if missing)
  * STAR_KERNELS=pure    force the NumPy backend
  * unset                compiled module if importable, else NumPy

Both backends expose the same three functions with identical numeric
behavior; `backend_name()` reports which one is live.
"""

import os

from star_repair.kernels import pure as _pure

SHAPE_BOX = _pure.SHAPE_BOX
SHAPE_CYLINDER = _pure.SHAPE_CYLINDER
SHAPE_SPHERE = _pure.SHAPE_SPHERE
SQRT2 = _pure.SQRT2

_choice = os.environ.get("STAR_KERNELS", "").strip().lower()
if _choice == "pure":
    _impl = _pure
elif _choice == "native":
    from star_repair.kernels import _native as _impl
else:
    try:
        from star_repair.kernels import _native as _impl
    except ImportError:
        _impl = _pure

cluster_labels = _impl.cluster_labels
contain_mask = _impl.contain_mask
dijkstra_grid = _impl.dijkstra_grid


def backend_name() -> str:
    return _impl.BACKEND_NAME


def backends() -> dict:
    """All importable backends, keyed by name (used by tests and benchmarks)."""
    found = {"pure": _pure}
    try:
        from star_repair.kernels import _native
        found["native"] = _native
    except ImportError:
        pass
    return found
