"""Pure-Python kernels; ``_ckernels`` is the compiled twin with the same API."""

NAME = "python"


def replay_interleave(xs, height):
    """Replay searches on the reference tree; returns (flips, first assignments)."""
    n = (1 << height) - 1
    pref = bytearray(n + 1)
    root = 1 << (height - 1)
    flips = fresh = 0
    for x in xs:
        a = root
        step = a >> 1
        while step:
            d = 1 if x <= a else 2
            old = pref[a]
            if old != d:
                if old:
                    flips += 1
                else:
                    fresh += 1
                pref[a] = d
            if x == a:
                break
            if x < a:
                a -= step
            else:
                a += step
            step >>= 1
    return flips, fresh


def slab_crossings(depths_from, depths_to, s, h):
    """Count walk steps whose endpoints lie in different slab blocks.

    A step joins a node at depth ``t`` with one at depth ``t + 1``; the
    edge is cut when ``t + 1 == h`` or ``t + 1 >= h`` and ``(t + 1 - h) % s == 0``.
    """
    count = 0
    for a, b in zip(depths_from, depths_to):
        lower = a if a > b else b
        if lower >= h and (lower - h) % s == 0:
            count += 1
    return count
