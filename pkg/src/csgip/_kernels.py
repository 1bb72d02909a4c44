"""Compiled inner loops.  Everything here works on plain numpy arrays.

Coalition values are looked up through ``by_mask``, a float64 array of length
``2**n`` indexed by coalition bitmask (entry 0 unused).
"""
import numpy as np
from numba import njit

# search_subspace status codes
FINISHED = 0
PAUSED = 1
STOPPED = 2


@njit(cache=True)
def lex_masks(n, s):
    """Masks of all s-subsets of n agents in ascending lexicographic order."""
    total = 1
    for i in range(s):
        total = total * (n - i) // (i + 1)
    out = np.empty(total, dtype=np.int64)
    c = np.arange(s)
    for r in range(total):
        m = 0
        for j in range(s):
            m |= 1 << c[j]
        out[r] = m
        i = s - 1
        while i >= 0 and c[i] == n - s + i:
            i -= 1
        if i < 0:
            break
        c[i] += 1
        for j in range(i + 1, s):
            c[j] = c[j - 1] + 1
    return out


@njit(cache=True)
def _enter_level(k, parts, rep, comb, avail_size):
    """Place the first admissible combination on level k; False if none."""
    g = parts[k]
    alpha = 0
    if k > 0 and parts[k] == parts[k - 1]:
        alpha = comb[k - 1, 0]
    upper = avail_size[k] - g * rep[k]
    if alpha > upper:
        return False
    for j in range(g):
        comb[k, j] = alpha + j
    return True


@njit(cache=True)
def _advance_level(k, parts, rep, comb, avail_size):
    """Next lexicographic combination on level k; False when exhausted."""
    g = parts[k]
    m = avail_size[k]
    i = g - 1
    while i >= 0 and comb[k, i] == m - g + i:
        i -= 1
    if i < 0:
        return False
    comb[k, i] += 1
    for j in range(i + 1, g):
        comb[k, j] = comb[k, j - 1] + 1
    if comb[k, 0] > m - g * rep[k]:
        return False
    return True


@njit(cache=True)
def search_subspace(by_mask, parts, rep, rest_max, state, comb, avail, avail_size,
                    prefix, masks, best_masks, best, stop_value, use_bound,
                    budget, record):
    """Duplicate-free enumeration of one subspace with branch-and-bound.

    ``parts`` is non-decreasing with at least two entries; ``rep[k]`` counts
    parts equal to ``parts[k]`` at positions >= k; ``rest_max[k]`` is the sum
    of per-size maxima over positions >= k.  ``comb[k]`` holds 0-based
    positions into the ascending agent array ``avail[k]``.  The last
    coalition is always the set of agents left over, so it is read off the
    remaining-agent mask instead of being cycled.

    ``state = [k, started, examined, improved]`` lets the caller resume after
    ``budget`` loop steps.  ``best`` is a length-1 array holding the
    incumbent value; ``best_masks`` receives the coalitions of any improving
    structure.  When ``record`` has rows, every complete structure visited is
    written to it (testing hook).

    Returns FINISHED, PAUSED (budget used up) or STOPPED (``best`` reached
    ``stop_value``).
    """
    K = parts.shape[0]
    last = K - 1
    n = avail.shape[1]
    full = (1 << n) - 1
    k = state[0]
    if state[1] == 0:
        state[1] = 1
        k = 0
        avail_size[0] = n
        for i in range(n):
            avail[0, i] = i
        prefix[0] = 0.0
        if not _enter_level(0, parts, rep, comb, avail_size):
            state[0] = 0
            return FINISHED
    steps = 0
    nrec = record.shape[0]
    while True:
        if steps >= budget:
            state[0] = k
            return PAUSED
        steps += 1
        g = parts[k]
        m = 0
        for j in range(g):
            m |= 1 << avail[k, comb[k, j]]
        masks[k] = m
        val = prefix[k] + by_mask[m]
        descend = False
        if (not use_bound) or val + rest_max[k + 1] > best[0]:
            if k == last - 1:
                used = m
                for j in range(k):
                    used |= masks[j]
                leaf = full ^ used
                masks[last] = leaf
                total = val + by_mask[leaf]
                ex = state[2]
                if ex < nrec:
                    for j in range(K):
                        record[ex, j] = masks[j]
                state[2] = ex + 1
                if total > best[0]:
                    best[0] = total
                    for j in range(K):
                        best_masks[j] = masks[j]
                    state[3] = 1
            else:
                descend = True
        if best[0] >= stop_value:
            state[0] = k
            return STOPPED
        if descend:
            # remaining agents stay in ascending order
            cnt = 0
            for i in range(avail_size[k]):
                a = avail[k, i]
                if not (m >> a) & 1:
                    avail[k + 1, cnt] = a
                    cnt += 1
            avail_size[k + 1] = cnt
            prefix[k + 1] = val
            if _enter_level(k + 1, parts, rep, comb, avail_size):
                k += 1
                continue
        # move to the next combination, backtracking as needed
        while not _advance_level(k, parts, rep, comb, avail_size):
            if k == 0:
                state[0] = 0
                return FINISHED
            k -= 1


@njit(cache=True)
def dp_tables(by_mask, n):
    """Optimal partition value of every subset, O(3^n).

    Splits are enumerated as proper submasks containing the lowest set bit of
    the subset, so each unordered split is evaluated once.  Returns
    (best_value, best_split, split_evaluations).
    """
    size = 1 << n
    best = np.empty(size, dtype=np.float64)
    split = np.zeros(size, dtype=np.int64)
    best[0] = 0.0
    evals = 0
    for S in range(1, size):
        b = by_mask[S]
        arg = S
        low = S & (-S)
        rest = S ^ low
        # submasks T of rest, T != rest; candidate block = low | T
        T = (rest - 1) & rest
        if rest != 0:
            while True:
                sub = low | T
                evals += 1
                v = best[sub] + best[S ^ sub]
                if v > b:
                    b = v
                    arg = sub
                if T == 0:
                    break
                T = (T - 1) & rest
        best[S] = b
        split[S] = arg
    return best, split, evals


@njit(cache=True)
def brute_force(by_mask, n):
    """Exhaustive search over restricted growth strings.

    Returns (best value, block id per agent for the first optimal structure,
    number of structures visited).
    """
    rgs = np.zeros(n, dtype=np.int64)
    maxb = np.ones(n, dtype=np.int64)  # maxb[i] = max(rgs[0..i-1]) + 1
    maxb[0] = 0
    blocks = np.zeros(n, dtype=np.int64)
    best = -np.inf
    best_rgs = np.zeros(n, dtype=np.int64)
    count = 0
    while True:
        for j in range(n):
            blocks[j] = 0
        nb = 0
        for i in range(n):
            blocks[rgs[i]] |= 1 << i
            if rgs[i] + 1 > nb:
                nb = rgs[i] + 1
        v = 0.0
        for j in range(nb):
            v += by_mask[blocks[j]]
        count += 1
        if v > best:
            best = v
            best_rgs[:] = rgs
        # next restricted growth string
        i = n - 1
        while i > 0 and rgs[i] == maxb[i]:
            i -= 1
        if i <= 0:
            break
        rgs[i] += 1
        for j in range(i + 1, n):
            rgs[j] = 0
            m = rgs[j - 1] + 1 if rgs[j - 1] + 1 > maxb[j - 1] else maxb[j - 1]
            maxb[j] = m
    return best, best_rgs, count
