"""Small numeric helpers shared across modules."""
import numpy as np


def window_max(raw: np.ndarray, lo: np.ndarray) -> np.ndarray:
    """max(raw[lo[p]:p+1]) for every p, via a sparse table."""
    P = raw.size
    table = [raw]
    width = 1
    while 2 * width <= P:
        prev = table[-1]
        table.append(np.maximum(prev[:-width], prev[width:]))
        width *= 2
    p = np.arange(P)
    span = p - lo + 1
    level = np.floor(np.log2(span)).astype(int)
    out = np.empty(P)
    for j in np.unique(level):
        sel = level == j
        left = lo[sel]
        right = p[sel] - (1 << j) + 1
        out[sel] = np.maximum(table[j][left], table[j][right])
    return out
