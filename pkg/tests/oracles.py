"""Independent reference implementations used only by the tests.

Nothing here imports the package's numerical routines: subsets come from
recursion, Shapley values from permutations, Gaussian conditioning from an
explicit matrix inverse, ranks from sorting.
"""

import itertools
import math

import numpy as np


def power_set(items):
    items = list(items)
    if not items:
        return [frozenset()]
    rest = power_set(items[1:])
    return rest + [s | {items[0]} for s in rest]


def shapley_by_permutations(v, M):
    """Average marginal contribution over all orderings; ``v`` maps frozensets
    of 1-based features to values."""
    phi = np.zeros(M)
    perms = list(itertools.permutations(range(1, M + 1)))
    for order in perms:
        seen = frozenset()
        for j in order:
            phi[j - 1] += v[seen | {j}] - v[seen]
            seen = seen | {j}
    return phi / len(perms)


def table_to_sets(values, M):
    out = {}
    for mask, val in enumerate(values):
        out[frozenset(j + 1 for j in range(M) if mask >> j & 1)] = val
    return out


def gaussian_conditional_mean(mu, sigma, observed, x_star):
    """Conditional mean of the unobserved block via ``numpy.linalg.inv``."""
    M = len(mu)
    o = sorted(observed)
    u = [j for j in range(M) if j not in observed]
    if not o:
        return u, np.array(mu, dtype=float)[u]
    inv = np.linalg.inv(sigma[np.ix_(o, o)])
    return u, mu[u] + sigma[np.ix_(u, o)] @ inv @ (x_star[o] - mu[o])


def linear_gaussian_v(beta, mu, sigma, x_star, observed):
    """``E[beta @ x | x_S = x_star_S]`` for 0-based ``observed`` columns."""
    u, m = gaussian_conditional_mean(mu, sigma, set(observed), x_star)
    o = sorted(observed)
    return float(beta[o] @ x_star[o] + beta[u] @ m)


def linear_gaussian_shapley(beta, mu, sigma, x_star):
    M = len(beta)
    v = {}
    for S in power_set(range(1, M + 1)):
        v[frozenset(S)] = linear_gaussian_v(beta, mu, sigma, x_star, [j - 1 for j in S])
    return shapley_by_permutations(v, M) if M <= 7 else _shapley_by_subsets(v, M)


def _shapley_by_subsets(v, M):
    phi = np.zeros(M)
    for j in range(1, M + 1):
        others = [k for k in range(1, M + 1) if k != j]
        for S in power_set(others):
            w = math.factorial(len(S)) * math.factorial(M - len(S) - 1) / math.factorial(M)
            phi[j - 1] += w * (v[S | {j}] - v[S])
    return phi


def midranks(a):
    a = list(a)
    order = sorted(range(len(a)), key=lambda i: a[i])
    ranks = [0.0] * len(a)
    i = 0
    while i < len(a):
        j = i
        while j + 1 < len(a) and a[order[j + 1]] == a[order[i]]:
            j += 1
        for k in range(i, j + 1):
            ranks[order[k]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def spearman_bruteforce(a, b):
    ra, rb = np.array(midranks(a)), np.array(midranks(b))
    return float(np.corrcoef(ra, rb)[0, 1])
