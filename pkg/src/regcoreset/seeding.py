"""Deterministic seed derivation.

Every stochastic component takes a seed derived from a master seed and the
integer coordinates of the work item (scheme index, size index, trial index,
and so on) through a fixed 64-bit splitmix chain.  Results are therefore
byte-identical across runs and across worker schedules.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1


def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def mix_seed(*parts: int) -> int:
    """Fold integer parts into one 64-bit seed; order-sensitive."""
    state = 0x8BADF00D5EED
    for part in parts:
        state = _splitmix64(state ^ (int(part) & _MASK))
    return state
