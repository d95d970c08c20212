"""Shared random generators for the test-suite."""


def random_subbox(rng, lo, hi, max_frac=1.0):
    """Random sub-box of ``[lo, hi]`` whose sides are at most ``max_frac`` of the domain."""
    blo, bhi = [], []
    for a, b in zip(lo, hi):
        w = (b - a) * rng.uniform(0.0, max_frac)
        s = rng.uniform(a, b - w)
        blo.append(s)
        bhi.append(min(s + w, b))
    return blo, bhi


def random_point(rng, lo, hi):
    return [min(max(rng.uniform(a, b), a), b) for a, b in zip(lo, hi)]
