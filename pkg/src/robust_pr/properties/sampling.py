"""Pair sampling and random local search shared by the empirical estimators."""
import numpy as np

STRATA = ("independent", "near_sign", "orthonormal")


def sample_pair(n, stratum, rng):
    """One ``(x, y)`` pair from the named stratum."""
    if stratum == "independent":
        x = rng.standard_normal(n)
        y = rng.standard_normal(n) * np.exp(0.5 * rng.standard_normal())
        return x, y
    if stratum == "near_sign":
        x = rng.standard_normal(n)
        delta = rng.standard_normal(n)
        delta *= 10.0 ** rng.uniform(-3, -1) * np.linalg.norm(x) / np.linalg.norm(delta)
        sign = 1.0 if rng.random() < 0.5 else -1.0
        return x, sign * x + delta
    if stratum == "orthonormal":
        if n < 2:
            return sample_pair(n, "independent", rng)
        Q, _ = np.linalg.qr(rng.standard_normal((n, 2)))
        return Q[:, 0].copy(), Q[:, 1].copy()
    raise ValueError(f"unknown stratum {stratum!r}")


def stratified_pairs(n, num_pairs, rng):
    """``num_pairs`` pairs cycling through the three strata."""
    return [sample_pair(n, STRATA[k % len(STRATA)], rng) for k in range(num_pairs)]


def local_search(fun, x, y, steps, rng, maximize, sigma=0.1, coordinatewise=False):
    """Random-direction hill climbing on ``fun(x, y)``.

    Proposals perturb ``x`` and ``y`` (or, with ``coordinatewise``, a single
    coordinate of one of them) by a Gaussian step scaled to the current pair;
    improvements are accepted and grow the step, rejections shrink it.
    Proposals where ``fun`` raises ``ValueError`` are rejected.
    """
    sense = 1.0 if maximize else -1.0
    best = fun(x, y)
    n = x.shape[0]
    for _ in range(steps):
        scale = sigma * max(np.linalg.norm(x), np.linalg.norm(y), 1e-300)
        if coordinatewise:
            xn, yn = x.copy(), y.copy()
            j = int(rng.integers(n))
            if rng.random() < 0.5:
                xn[j] += scale * rng.standard_normal()
            else:
                yn[j] += scale * rng.standard_normal()
        else:
            xn = x + scale * rng.standard_normal(n) / np.sqrt(n)
            yn = y + scale * rng.standard_normal(n) / np.sqrt(n)
        try:
            val = fun(xn, yn)
        except ValueError:
            sigma *= 0.8
            continue
        if sense * val > sense * best:
            x, y, best = xn, yn, val
            sigma = min(1.0, sigma * 1.2)
        else:
            sigma *= 0.8
    return x, y, best
