"""Kernel backend chosen at import time.

``COMPETITION_LAB_BACKEND`` may be ``auto`` (default: compiled if built,
else Python), ``compiled`` (fail if the extension is missing) or ``python``.
"""

import os

_choice = os.environ.get("COMPETITION_LAB_BACKEND", "auto").lower()

if _choice == "python":
    from . import _pykernels as kernels
else:
    try:
        from . import _kernels as kernels
    except ImportError:
        if _choice == "compiled":
            raise
        from . import _pykernels as kernels

BACKEND = kernels.NAME
