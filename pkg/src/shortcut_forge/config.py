"""Global numerical configuration.

The reduced Planck constant is a process-wide constant (natural units by
default). Functions accept an ``hbar`` keyword that overrides the global
value for that call.
"""

from __future__ import annotations

import os

_HBAR = 1.0

#: Hermiticity is asserted relative to the largest matrix entry.
TOL_HERM = 1e-12

#: Default relative gap floor: gaps below eps_gap * ||H|| count as degenerate.
EPS_GAP_REL = 1e-10

#: Nested-commutator norms beyond this abort with a scaling hint.
NORM_OVERFLOW = 1e150


def hbar(override: float | None = None) -> float:
    """Return the effective hbar: the override if given, else the global value."""
    return _HBAR if override is None else float(override)


def set_hbar(value: float) -> None:
    """Set the global hbar (natural units use 1.0, the default)."""
    global _HBAR
    if value <= 0:
        raise ValueError("hbar must be positive")
    _HBAR = float(value)


def thread_cap() -> int:
    """Parallelism cap for scenario sweeps, from SHORTCUT_FORGE_THREADS (default 1)."""
    raw = os.environ.get("SHORTCUT_FORGE_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)
