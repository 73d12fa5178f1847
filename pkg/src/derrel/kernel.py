"""Backend selection for the residence simulation loop.

The compiled extension is used when it imports; otherwise the numpy
implementation is used. Set ``DERREL_BACKEND=python`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _kernel_py

BACKEND = "python"
_simulate = _kernel_py.simulate_block

if os.environ.get("DERREL_BACKEND", "").lower() != "python":
    try:
        from . import _kernel  # type: ignore[attr-defined]
    except ImportError:  # extension not built
        pass
    else:
        BACKEND = "cython"
        _simulate = _kernel.simulate_block


def simulate_block(*args, backend: str | None = None):
    """Run the residence loop for a block of customers.

    Returns per-customer ``(events, downtime_hours, unserved_kwh)`` arrays.
    """
    if backend is None:
        return _simulate(*args)
    if backend == "python":
        return _kernel_py.simulate_block(*args)
    if backend == "cython":
        from . import _kernel  # type: ignore[attr-defined]

        return _kernel.simulate_block(*args)
    raise ValueError(f"unknown backend {backend!r}")


def available_backends() -> list[str]:
    names = ["python"]
    try:
        from . import _kernel  # type: ignore[attr-defined]  # noqa: F401
    except ImportError:
        return names
    return ["cython"] + names
