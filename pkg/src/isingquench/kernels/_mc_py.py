"""Pure-Python Monte Carlo kernels.

Fallback used when the compiled extension is unavailable.  Draw order is
identical to the Cython core (one scalar uniform per decision), so given
the same generator state both backends produce bit-identical trajectories.
Roughly two orders of magnitude slower; fine for tests and small lattices.
"""


def glauber_sweeps(spins, nbrs, flip_prob, n_sweeps, rng):
    """Run n_sweeps Glauber sweeps in place (N random-site attempts each)."""
    n = spins.shape[0]
    twod = nbrs.shape[1]
    rand = rng.random
    for _ in range(n_sweeps):
        for _ in range(n):
            site = int(rand() * n)
            m = int(spins[nbrs[site]].sum())
            s = int(spins[site])
            if rand() < flip_prob[((s + 1) >> 1) * (twod + 1) + ((m + twod) >> 1)]:
                spins[site] = -s


def wolff_updates(spins, nbrs, p_add, n_updates, rng):
    """Run n_updates Wolff cluster flips in place; returns total flipped sites.

    Members are flipped on insertion (marking them visited); the stack is
    LIFO with neighbors pushed in table order, matching the compiled core.
    """
    n = spins.shape[0]
    rand = rng.random
    flipped = 0
    stack = []
    for _ in range(n_updates):
        site = int(rand() * n)
        cs = int(spins[site])
        spins[site] = -cs
        flipped += 1
        stack.append(site)
        while stack:
            site = stack.pop()
            for j in nbrs[site]:
                if spins[j] == cs:
                    if rand() < p_add:
                        spins[j] = -cs
                        flipped += 1
                        stack.append(int(j))
    return flipped
