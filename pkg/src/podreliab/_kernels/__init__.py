"""Inner-loop kernels with a compiled core and a pure-numpy fallback.

The compiled extension is used when it imported cleanly; set
``PODRELIAB_PURE=1`` to force the pure-numpy implementation. Both
backends share formulas and evaluation order, so results are identical.
"""

import os

from . import _pure

_impl = _pure
if os.environ.get("PODRELIAB_PURE", "").strip() not in ("1", "true", "yes"):
    try:
        from . import _fast

        _impl = _fast
    except ImportError:
        pass

BACKEND = _impl.BACKEND
interp_polyline = _impl.interp_polyline
gap_at_times = _impl.gap_at_times
first_sign_flip = _impl.first_sign_flip


def available_backends():
    """Names of importable kernel backends, pure fallback first."""
    names = ["pure"]
    try:
        from . import _fast  # noqa: F811

        names.append("cython")
    except ImportError:
        pass
    return names


def get_backend(name):
    """Return the kernel module for an explicit backend name."""
    if name == "pure":
        return _pure
    if name == "cython":
        from . import _fast

        return _fast
    raise ValueError(f"unknown kernel backend: {name!r}")
