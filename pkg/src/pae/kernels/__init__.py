"""Hot numerical kernels: compiled core with a pure NumPy fallback.

The compiled extension is picked automatically at import when present.
Set ``PAE_KERNELS=python`` to force the fallback (used by the benchmark
and the backend-parity tests).
"""

from __future__ import annotations

import os

from pae.kernels import pure as _pure

try:
    from pae.kernels import _ckernels as _fast
except ImportError:  # extension not built; NumPy fallback
    _fast = None

if _fast is not None and os.environ.get("PAE_KERNELS", "").lower() != "python":
    _impl = _fast
    BACKEND = "cython"
else:
    _impl = _pure
    BACKEND = "python"

span_max = _impl.span_max
sgns_batch = _impl.sgns_batch


def available_backends() -> dict[str, object]:
    """Importable kernel backends, keyed by name."""
    out: dict[str, object] = {"python": _pure}
    if _fast is not None:
        out["cython"] = _fast
    return out
