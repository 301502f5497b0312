"""Shared high-precision oracles for the test suite."""


def mp_gamma_quantile(p, shape):
    """Invert the regularized lower incomplete gamma by bisection at 40 digits."""
    import mpmath as mp

    mp.mp.dps = 40
    p = mp.mpf(p)
    shape = mp.mpf(shape)
    lo, hi = mp.mpf(0), mp.mpf(max(1.0, float(shape)))
    while mp.gammainc(shape, 0, hi, regularized=True) < p:
        hi *= 2
    for _ in range(200):
        mid = (lo + hi) / 2
        if mp.gammainc(shape, 0, mid, regularized=True) < p:
            lo = mid
        else:
            hi = mid
    return float((lo + hi) / 2)
