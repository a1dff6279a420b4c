"""Recursive binary pebbling (Bennett's reversible schedule) on a line of segments.

Pebble k means the state after segment k is held. Position 0 (the input) is
always held. Running segment k forward or backward is legal only while pebble
k-1 is present.
"""

from __future__ import annotations


def _schedule(start: int, n: int, out: list[int]) -> None:
    """Toggles that move from "pebble at start" to "pebbles at start and start+n"."""
    if n == 1:
        out.append(start + 1)
        return
    half = n // 2
    _schedule(start, half, out)
    _schedule(start + half, half, out)
    undo: list[int] = []
    _schedule(start, half, undo)
    out.extend(reversed(undo))


def pebble_schedule(m: int) -> list[int]:
    if m < 1 or m & (m - 1):
        raise ValueError(f"segment count must be a power of 2, got {m}")
    out: list[int] = []
    _schedule(0, m, out)
    return out


def pebble_game_simulate(m: int) -> tuple[int, int]:
    """(segment executions, peak pebbles) for the binary schedule on m = 2^L segments."""
    held = {0}
    peak = 0
    moves = pebble_schedule(m)
    for k in moves:
        if k - 1 not in held:
            raise RuntimeError(f"illegal move on segment {k}: its input is not pebbled")
        held ^= {k}
        peak = max(peak, len(held) - 1)
    if held != {0, m}:
        raise RuntimeError(f"schedule ended with pebbles {sorted(held)}")
    return len(moves), peak


def pebble_closed_form(levels: int) -> tuple[int, int]:
    if levels < 0:
        raise ValueError("recursion depth must be non-negative")
    return 3**levels, levels + 1
