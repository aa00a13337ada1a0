"""Published 2x3x3 overlap values, used for comparison and regression checks.

``PUBLISHED[orbit][target]`` is the printed maximal squared overlap of the
target with the orbit; 1 marks a saturated cell and ``None`` the diagonal.
"""
from __future__ import annotations

from .states import PSI_IDS

_R = 2 / 3
_ROWS = {
    6: [None, 1, _R, _R, _R, .75, .75, .75, .5625, .75, .75, .65],
    7: [.75, None, _R, _R, _R, .75, .75, .5433, .5625, .7, .75, .6129],
    8: [1, 1, None, _R, _R, .875, .75, .75, .75, .75, .75, .7252],
    9: [1, 1, _R, None, _R, .75, .875, .75, .75, .75, .75, .7252],
    10: [1, 1, 1, 1, None, .875, .875, .8333, .75, .9045, 1, .7955],
    11: [1, 1, 1, _R, _R, None, .75, .75, .75, .75, .75, .8],
    12: [1, 1, _R, 1, _R, .75, None, .75, .75, .75, .75, .8],
    13: [1, 1, 1, 1, .8333, 1, 1, None, 1, .95, 1, 1],
    14: [1, 1, 1, 1, _R, .875, .875, .8125, None, .75, .75, .8],
    15: [1, 1, 1, 1, 1, 1, 1, 1, 1, None, 1, 1],
    16: [1, 1, 1, 1, .7357, .875, .875, .7706, .75, .75, None, .8],
    17: [1, 1, 1, 1, .795, 1, 1, .8958, 1, .875, 1, None],
}

PUBLISHED = {
    f"psi{r}": {f"psi{c}": v for c, v in zip(range(6, 18), row)} for r, row in _ROWS.items()
}

# printed as fractions or short terminating decimals
EXACT_VALUES = (2 / 3, 3 / 4, 0.875, 0.8, 0.95, 0.5625, 0.8333, 0.8125)
# printed to three or four digits
LOW_PRECISION_VALUES = (0.65, 0.7, 0.5433, 0.6129, 0.7252, 0.7955, 0.795, 0.7357, 0.7706,
                        0.8958, 0.9045)


def published_cells(kind=None):
    """``[(orbit, target, value)]``; ``kind`` in {None, "saturated", "exact", "low"}."""
    out = []
    for r in PSI_IDS:
        for c in PSI_IDS:
            v = PUBLISHED[r][c]
            if v is None:
                continue
            if kind == "saturated" and v != 1:
                continue
            if kind == "exact" and not any(abs(v - e) < 1e-12 for e in EXACT_VALUES):
                continue
            if kind == "low" and not any(abs(v - e) < 1e-12 for e in LOW_PRECISION_VALUES):
                continue
            out.append((r, c, v))
    return out
