#!/usr/bin/env python3
"""Writes the seeded random fixtures random-<seed>.json (uncanonicalized).

Run `oblique canonicalize` on the output before committing.
"""
import json
import math
import random
import sys


def orthonormalize(cols):
    basis = []
    for v in cols:
        w = list(v)
        for _ in range(2):
            for b in basis:
                dot = sum(x * y for x, y in zip(w, b))
                w = [x - dot * y for x, y in zip(w, b)]
        norm = math.sqrt(sum(x * x for x in w))
        if norm < 1e-8:
            raise ValueError("degenerate draw")
        basis.append([x / norm for x in w])
    return basis


def rows(cols):
    return [[c[i] for c in cols] for i in range(len(cols[0]))]


def make(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 5)
    d = rng.randint(1, n)
    count = rng.randint(max(d, 2), 3 * d)
    gauss = lambda: rng.gauss(0.0, 1.0)
    bw = orthonormalize([[gauss() for _ in range(n)] for _ in range(d)])
    bv = orthonormalize([[x + 0.5 * gauss() for x in b] for b in bw])
    vectors = []
    for _ in range(count):
        coeff = [gauss() for _ in range(d)]
        vectors.append([sum(coeff[k] * bw[k][i] for k in range(d)) for i in range(n)])
    weights = [1.0 / count] * count
    weights[-1] = 1.0 - sum(weights[:-1])
    return {
        "name": f"random-{seed}",
        "W": {"ambient_dim": n, "basis": rows(bw)},
        "V": {"ambient_dim": n, "basis": rows(bv)},
        "frame": {"ambient_dim": n, "subspace_basis": rows(bw), "vectors": vectors},
        "mu": {"ambient_dim": n, "points": vectors, "weights": weights},
    }


if __name__ == "__main__":
    seeds = [int(s) for s in sys.argv[1:]] or [1, 2, 3, 4, 5]
    for seed in seeds:
        with open(f"random-{seed}.json", "w") as fh:
            json.dump(make(seed), fh)
