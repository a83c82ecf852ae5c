"""Independent reference computations used as test oracles.

Nothing here calls into the embedding module: adjacency is rebuilt from the
serialised middle cycle and probabilities come from counting bit strings.
"""

from fractions import Fraction
from itertools import product


def adjacency(n, middle_cycle):
    total = 2 ** (n + 2) - 2
    half = 2 ** (n + 1) - 1
    adj = {v: set() for v in range(total)}

    def link(u, v):
        adj[u].add(v)
        adj[v].add(u)

    for h in range(1, half):
        parent = (h - 1) // 2
        link(h, parent)  # left tree in heap order
        link(total - 1 - h, total - 1 - parent)  # mirrored right tree
    cyc = [int(x) for x in middle_cycle]
    for k in range(len(cyc)):
        link(cyc[k], cyc[(k + 1) % len(cyc)])
    return {v: sorted(s) for v, s in adj.items()}


def improper_literal(parent, image):
    t = len(parent)
    for a in range(1, t):
        for b in range(1, t):
            if a != b and image[a] == image[b] and image[parent[a]] != image[parent[b]]:
                return True
    return False


def brute_force_probability(n, middle_cycle, parent, event="win"):
    """Count the 2**(t-1) equally likely bit strings that drive the sampler."""
    adj = adjacency(n, middle_cycle)
    exit_id = 2 ** (n + 2) - 3
    t = len(parent)
    wins = 0
    for bits in product((0, 1), repeat=t - 1):
        image = [0]
        for a in range(1, t):
            p = parent[a]
            grand = image[parent[p]] if p > 0 else None
            cands = [u for u in adj[image[p]] if u != grand]
            image.append(cands[bits[a - 1]] if len(cands) == 2 else cands[0])
        exited = exit_id in image
        improper = improper_literal(parent, image)
        hit = {"win": exited or improper, "exit": exited, "improper": improper}[event]
        wins += hit
    return Fraction(wins, 2 ** (t - 1))


def floor_root(n, k):
    """Largest q with q**k <= 2**n, by linear search from the float guess."""
    q = int(2 ** (n / k)) + 2
    while q ** k > 2 ** n:
        q -= 1
    return q


def combined_total(t, n):
    d = 2 ** n - t
    return Fraction(t * t, 2 ** n) + Fraction(t * t, d) * (Fraction(2 ** (n + 2), d) + n + 1)


def theorem_scan_reference(n_min=1, n_max=120):
    """Rows of both operating points and n0, with comparisons in exact arithmetic.

    bound2 < 4 * 2**(-n/6) is tested as (bound2 / 4)**6 < 2**-n.
    """
    rows = []
    for n in range(n_min, n_max + 1):
        q2 = floor_root(n, 3)
        b2 = combined_total(q2, n)
        rows.append({
            "n": n,
            "queries1": floor_root(n, 6),
            "queries2": q2,
            "bound1": 4 * 2 ** (-n / 6),
            "bound2": float(b2),
            "smaller_bound": (b2 / 4) ** 6 < Fraction(1, 2 ** n),
        })
    n0 = None
    for row in reversed(rows):
        if not row["smaller_bound"]:
            break
        n0 = row["n"]
    return {"n0": n0, "rows": rows}


if __name__ == "__main__":
    import json
    import sys

    json.dump(theorem_scan_reference(), sys.stdout, indent=1)
    sys.stdout.write("\n")
