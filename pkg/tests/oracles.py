"""Independent brute-force re-derivations used as test oracles.

Nothing here calls the package's evaluators; every value is recomputed from
the rules of each game with plain loops.
"""

import itertools
import math
from fractions import Fraction as F

BOT = None


def grid(m):
    return [F(j, m) for j in range(m + 1)]


# -- facility location ---------------------------------------------------------


def facility_commitment_utility(m, k, b, agent, theta):
    """Expected utility of ``agent`` with true location ``theta`` under the
    commitment lottery at report profile ``b``."""
    total = F(0)
    for l in range(1, m + 1):
        spots = [F(l - 1, m)] + [F(l, m)] * (k - 1)
        if b[agent] is BOT:
            continue
        d = [abs(x - b[agent]) for x in spots]
        usable = [x for x, dx in zip(spots, d) if dx == min(d)]
        total += 1 - min(abs(x - theta) for x in usable)
    return total / m


# -- reserve-price auction -------------------------------------------------------


def vcg_commitment_utility(m, b, agent, theta):
    prices = [F(j, 2 * m) for j in range(2 * m + 1)]
    if b[agent] is BOT:
        return F(0)
    return sum((theta - z for z in prices if b[agent] >= z), F(0)) / len(prices)


def first_price_utility(w, b, agent, theta):
    """A deliberately non-truthful variant: eligible bidders pay their bid."""
    if b[agent] is BOT or b[agent] < w[agent]:
        return F(0)
    return theta - b[agent]


# -- CPU allocation ---------------------------------------------------------------


def resource_commitment_alloc(n, k, b, i, j):
    s = [0] * n
    bi = b[i]
    if bi is not BOT and j > bi:
        s[i] = int(bi)
        rest = (k - int(bi)) // (n - 1)
    else:
        rest = k // (n - 1)
    for o in range(n):
        if o != i and b[o] is not BOT:
            s[o] = rest
    return s


def resource_commitment_utility(n, k, b, agent, theta):
    hits = 0
    for i in range(n):
        for j in range(1, 2 * k + 1):
            s = resource_commitment_alloc(n, k, b, i, j)
            hits += s[agent] >= theta
    return F(hits, 2 * n * k)


# -- penalty gaps ------------------------------------------------------------------


def min_gap(n, types, eu, with_absent=True):
    """min over agents, true types, lies and others' reports of truthful minus
    lying expected utility; None when nobody can lie."""
    others_space = list(types) + ([BOT] if with_absent else [])
    best = None
    for a in range(n):
        for rest in itertools.product(others_space, repeat=n - 1):
            for th in types:
                for lie in types:
                    if lie == th:
                        continue
                    truth_b = list(rest[:a]) + [th] + list(rest[a:])
                    lie_b = list(rest[:a]) + [lie] + list(rest[a:])
                    g = eu(truth_b, a, th) - eu(lie_b, a, th)
                    best = g if best is None else min(best, g)
    return best


# -- Hedge ---------------------------------------------------------------------------


def hedge_probs(eta, scores):
    top = max(scores)
    e = [math.exp(eta * (s - top)) for s in scores]
    z = sum(e)
    return [x / z for x in e]


# -- full trajectory tree under fixed report scripts ----------------------------------


def tree_values(members, commitment, utility, lam, eta, objectives, types, discount, reports):
    """Expected discounted utility of every agent when round-t reports are the
    fixed profile ``reports[t]``; enumerates every Hedge draw and outcome."""
    n, T = len(types[0]), len(types)

    def rec(t, scores):
        if t == T:
            return [0.0] * n
        b = tuple(reports[t])
        probs = hedge_probs(eta, scores)
        inc = []
        for pi in members:
            inc.append(float(sum((p * objectives[t](b, s) for s, p in pi(b)), F(0))))
        nxt = [x + y for x, y in zip(scores, inc)]
        cont = rec(t + 1, nxt)
        out = [0.0] * n
        for k, q in enumerate(probs):
            if q == 0:
                continue
            dist = {}
            for s, p in members[k](b):
                dist[s] = dist.get(s, F(0)) + (1 - lam) * p
            if lam:
                for s, p in commitment(b):
                    dist[s] = dist.get(s, F(0)) + lam * p
            for s, p in dist.items():
                for i in range(n):
                    if types[t][i] is BOT:
                        continue
                    out[i] += q * float(p * discount[i][t] * utility(i, types[t][i], s))
        return [o + c for o, c in zip(out, cont)]

    return rec(0, [0.0] * len(members))
