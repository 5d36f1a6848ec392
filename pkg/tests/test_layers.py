import random
from fractions import Fraction as F

import pytest

from l0lra.core import Subspace
from l0lra.errors import ParameterError
from l0lra.layers import LayerDecomposition, decompose, is_full, verify, verify_report

D = F(1, 40)


def test_single_direction_gets_ambient_completion():
    vs = [(2, 1)] * 5
    d = decompose(vs, D)
    assert d.layers == (tuple(range(5)),)
    assert d.subspaces == (Subspace.span([(2, 1)], 2),)
    assert d.ambient_completed
    assert verify(d, vs, D)


def test_three_lines_form_one_layer():
    vs = [(1, 0)] * 10 + [(0, 1)] * 10 + [(1, 1)] * 10
    d = decompose(vs, D)
    assert d.n_layers == 1
    assert d.subspaces[0] == Subspace.full(2)
    assert not d.ambient_completed


def test_dominant_line_splits_off():
    vs = [(1, 0)] * 100 + [(0, 1)]
    d = decompose(vs, D)
    assert d.layers == (tuple(range(100)), (100,))
    assert d.subspaces == (Subspace.span([(1, 0)], 2), Subspace.full(2))
    assert verify(d, vs, D)


def test_is_full_examples():
    zero = Subspace.zero(2)
    line = Subspace.span([(1, 0)], 2)
    assert is_full(line, zero, [(1, 0), (2, 0)], D)
    assert not is_full(Subspace.full(2), zero, [(1, 0)] * 100 + [(0, 1)], D)
    assert is_full(Subspace.full(2), zero, [(1, 0)] * 10 + [(0, 1)] * 10 + [(1, 1)] * 10, D)
    with pytest.raises(ParameterError):
        is_full(zero, line, [(1, 0)], D)


def test_zero_vectors():
    d = decompose([(0, 0), (1, 0), (0, 0)], D)
    assert 0 in d.layers[0] and 2 in d.layers[0]
    assert verify(d, [(0, 0), (1, 0), (0, 0)], D)
    d = decompose([(0, 0, 0)] * 3, D)
    assert d.layers == ((0, 1, 2),) and d.subspaces == (Subspace.zero(3),) and d.ambient_completed


def test_verify_rejects_broken_decompositions():
    vs = [(1, 0)] * 100 + [(0, 1)]
    good = decompose(vs, D)
    outside = LayerDecomposition(2, good.layers[::-1], good.subspaces)
    assert not verify(outside, vs, D)
    big = LayerDecomposition(2, (tuple(range(50)), tuple(range(50, 101))),
                             (Subspace.span([(1, 0)], 2), Subspace.full(2)))
    assert any("too large" in p or "outside" in p for p in verify_report(big, vs, D))
    not_partition = LayerDecomposition(2, (tuple(range(100)),), (Subspace.full(2),))
    assert not verify(not_partition, vs, D)


@pytest.mark.parametrize("seed", range(40))
def test_random_families(seed):
    rng = random.Random(seed)
    k = rng.randint(1, 3)
    dirs = [tuple(rng.randint(-2, 2) for _ in range(k)) for _ in range(rng.randint(1, 4))]
    vs = []
    for _ in range(rng.randint(1, 40)):
        v = rng.choice(dirs)
        vs.append(tuple(rng.choice([1, 2, F(1, 2)]) * x for x in v))
    d = decompose(vs, D, k)
    assert verify(d, vs, D), verify_report(d, vs, D)
    dims = [T.dim for T in d.subspaces]
    assert dims == sorted(set(dims)) and len(dims) <= k
