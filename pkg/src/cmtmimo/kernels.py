"""Tracking-kernel backend selection.

The compiled Cython kernel is preferred; the pure-numpy fallback keeps the
package functional without a C toolchain.  ``CMTMIMO_KERNEL=py`` (or
``=cython``) forces a backend, which the benchmark and the equivalence
tests use.  Both implementations share one contract: see
``_kernel_py.track_segment``.
"""

from __future__ import annotations

import os

from . import _kernel_py

_requested = os.environ.get("CMTMIMO_KERNEL", "").strip().lower()

if _requested == "py":
    _impl = _kernel_py
    BACKEND = "numpy"
elif _requested == "cython":
    from . import _kernel as _impl  # ImportError here means the build is broken

    BACKEND = "cython"
elif _requested:
    raise ValueError(
        f"CMTMIMO_KERNEL={_requested!r} not recognized (use 'py' or 'cython')"
    )
else:
    try:
        from . import _kernel as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _kernel_py
        BACKEND = "numpy"

track_segment = _impl.track_segment
