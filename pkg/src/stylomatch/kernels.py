"""Backend selection for the pairwise scoring kernels.

The compiled extension is used when importable. Setting the environment
variable ``STYLOMATCH_PURE_PYTHON=1`` forces the numpy fallback.
"""

import os
from types import ModuleType

from . import _pykernels

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKENDS = {"python": _pykernels}
if _compiled is not None:
    BACKENDS["compiled"] = _compiled

if _compiled is not None and not os.environ.get("STYLOMATCH_PURE_PYTHON"):
    BACKEND = "compiled"
else:
    BACKEND = "python"

_active = BACKENDS[BACKEND]
pair_scores = _active.pair_scores
kl2_pp2_row = _active.kl2_pp2_row


def get_backend(name: str) -> ModuleType:
    """Return a kernel module by name (``"compiled"`` or ``"python"``)."""
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(
            f"kernel backend {name!r} unavailable; have {sorted(BACKENDS)}"
        ) from None
