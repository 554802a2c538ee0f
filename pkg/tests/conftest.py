import random
from fractions import Fraction

import pytest

from leafpower import GlpCertificate, ThresholdSequence, WeightedTree

DENOMS = (1, 1, 1, 2, 3, 4)


def random_weighted_tree(rng: random.Random, n_leaves: int, integer=False) -> WeightedTree:
    """Random series-reduced tree with labeled leaves L0..L{n-1}.

    Grown by random leaf insertion (attach to an internal vertex or
    subdivide an edge), mirroring how the topology space is defined but
    with independent code.
    """
    assert n_leaves >= 2

    def weight():
        if integer:
            return Fraction(rng.randint(2, 12))
        return Fraction(rng.randint(1, 12), rng.choice(DENOMS))

    edges = {("L0", "L1"): weight()}
    internals = []
    counter = [0]
    for k in range(2, n_leaves):
        leaf = f"L{k}"
        if internals and rng.random() < 0.4:
            hub = rng.choice(internals)
        else:
            pair = rng.choice(list(edges))
            w = edges.pop(pair)
            hub = f"I{counter[0]}"
            counter[0] += 1
            internals.append(hub)
            if integer:
                w = max(w, Fraction(2))  # keep both halves integral
                cut = Fraction(rng.randint(1, int(w) - 1))
            else:
                cut = w * Fraction(rng.randint(1, 3), 4)
            edges[(pair[0], hub)] = cut
            edges[(hub, pair[1])] = w - cut
        edges[(hub, leaf)] = weight()
    labels = {f"L{i}": f"L{i}" for i in range(n_leaves)}
    return WeightedTree([(u, v, w) for (u, v), w in edges.items()], labels)


def random_certificate(rng: random.Random, max_leaves=8, max_q=3) -> GlpCertificate:
    n = rng.randint(2, max_leaves)
    q = rng.randint(1, max_q)
    tree = random_weighted_tree(rng, n)
    dists = sorted(
        {tree.distance(a, b) for a in tree.labels() for b in tree.labels() if str(a) < str(b)}
    )
    lo, hi = dists[0], dists[-1]
    thetas = set()
    while len(thetas) < q:
        # mix of exact distance hits (tie cases) and generic values
        if dists and rng.random() < 0.5:
            thetas.add(rng.choice(dists))
        else:
            num = rng.randint(1, 40)
            thetas.add(lo / 2 + (hi - lo + 1) * Fraction(num, 40))
    return GlpCertificate(tree, ThresholdSequence(tuple(sorted(thetas))))


@pytest.fixture
def rng():
    return random.Random(0xC0FFEE)
