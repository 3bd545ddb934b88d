"""
Seeded random networks for fuzzing the solvers and abstract domains against
each other
"""
import random

from fractions import Fraction

from .io import dense_network


def random_fraction(rng, lo=-2, hi=2, den=4):
    """
    Uniform rational in [lo, hi] with denominator `den`
    """
    return Fraction(rng.randint(lo * den, hi * den), den)


def random_network(seed=None, n_in=2, n_out=2, layers=(3, 3), activation='relu', rng=None, den=4):
    """
    Layered network with small rational weights

    Parameters
    ----------
    seed: int, default=None
        Seed for a fresh random.Random, ignored when `rng` is given
    n_in, n_out: int
        Input and output widths
    layers: tuple
        Hidden layer widths
    activation: str, default='relu'
    rng: random.Random, default=None

    Returns
    -------
    graph: Graph
    """
    rng   = rng or random.Random(seed)
    sizes = [n_in, *layers, n_out]

    weights, biases = [], []
    for fan_in, fan_out in zip(sizes, sizes[1:]):
        W = [[random_fraction(rng, den=den) for _ in range(fan_in)] for _ in range(fan_out)]
        # Keep every coefficient row from vanishing so no node is constant by accident
        for row in W:
            if not any(row):
                row[0] = Fraction(1)
        weights.append(W)
        biases.append([random_fraction(rng, -1, 1, den) for _ in range(fan_out)])

    return dense_network(weights, biases, activation)


def random_box(rng, n, width=1, den=4):
    """
    Random list of (lo, hi) Fraction pairs
    """
    box = []
    for _ in range(n):
        lo = random_fraction(rng, -1, 1, den)
        hi = lo + Fraction(rng.randint(0, width * den), den)
        box.append((lo, hi))
    return box
