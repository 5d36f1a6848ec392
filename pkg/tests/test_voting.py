import random
from fractions import Fraction as F
from itertools import combinations

import pytest

from l0lra.core import Subspace, solve_particular
from l0lra.errors import DimensionError, ParameterError
from l0lra.layers import decompose
from l0lra.voting import VoteInput, candidates, estimated_error, tau_good, vote


def test_scalar_majority():
    inp = VoteInput.build(1, [10], [[((1,), a) for a in (2, 2, 2, 7, 7)]])
    x, obj = vote(inp)
    assert x == (2,) and obj == 4


def test_big_layer_wins():
    inp = VoteInput.build(1, [100, 1], [[((1,), 3)] * 2, [((1,), 5)] * 2])
    assert vote(inp)[0] == (3,)


def test_estimated_error_examples():
    inp = VoteInput.build(2, [6, 4], [[((1, 0), 1), ((0, 1), 2)], [((1, 1), 3), ((1, 1), 0)]])
    assert estimated_error((1, 2), inp) == 2
    assert estimated_error((5, 5), inp) == 10
    single = VoteInput.build(1, [8], [[((1,), 1), ((1,), 2)]])
    assert estimated_error((1,), single) == 4


def test_build_checks():
    with pytest.raises(DimensionError):
        VoteInput.build(2, [1], [[((1,), 1)]])
    with pytest.raises(DimensionError):
        VoteInput.build(1, [1, 2], [[((1,), 1)]])
    with pytest.raises(ParameterError):
        VoteInput.build(1, [3], [[]])


@pytest.mark.parametrize("seed", range(25))
def test_vote_is_exact_minimizer(seed):
    rng = random.Random(seed)
    k = rng.randint(1, 3)
    layers = []
    for _ in range(rng.randint(1, 3)):
        layers.append([(tuple(rng.randint(-2, 2) for _ in range(k)), rng.randint(-3, 3))
                       for _ in range(rng.randint(1, 4))])
    inp = VoteInput.build(k, [rng.randint(1, 20) for _ in layers], layers)
    x, obj = vote(inp)
    # Any point satisfying a set of samples also arises from a solvable subset of them.
    pairs = sorted({p for layer in inp.samples for p in layer})
    best = estimated_error((0,) * k, inp)
    for r in range(1, len(pairs) + 1):
        for combo in combinations(pairs, r):
            sol = solve_particular([u for u, _ in combo], [a for _, a in combo], k)
            if sol is not None:
                best = min(best, estimated_error(sol, inp))
    assert obj == best == estimated_error(x, inp)


@pytest.mark.parametrize("seed", range(25))
def test_clean_spanning_samples_recover_target(seed):
    rng = random.Random(seed)
    k = rng.randint(1, 3)
    target = tuple(F(rng.randint(-4, 4), rng.randint(1, 2)) for _ in range(k))
    us = [tuple(int(i == j) for j in range(k)) for i in range(k)]
    us += [tuple(rng.randint(-2, 2) for _ in range(k)) for _ in range(4)]
    samples = [(u, sum(a * b for a, b in zip(u, target))) for u in us]
    assert vote(VoteInput.build(k, [len(samples)], [samples]))[0] == target


def test_subspace_restriction():
    T = Subspace.span([(1, 0)], 2)
    inp = VoteInput.build(2, [4], [[((1, 1), 2), ((2, 3), 4)]])
    x, _ = vote(inp, T)
    assert T.contains(x) and x == (2, 0)
    assert all(T.contains(c) for c in candidates(inp, T))


def test_tau_good_examples():
    vs = [(1, 0)] * 6 + [(0, 1)] * 2
    d = decompose(vs, F(1, 40))
    assert tau_good(vs, d, [list(J) for J in d.layers], 0)
    assert tau_good(vs, d, [[J[0]] for J in d.layers], 1)
    zeros = [(0, 0)] * 4
    dz = decompose(zeros, F(1, 40))
    assert tau_good(zeros, dz, [[0, 0]], 0)
    lopsided = decompose([(1, 0)] * 3 + [(0, 1)] * 3, F(1, 40))
    assert not tau_good([(1, 0)] * 3 + [(0, 1)] * 3, lopsided, [[0, 1, 2]], F(1, 10))
