import math
import random
from fractions import Fraction as F

import pytest

from conforming import clean_instance
from l0lra.core import FactorPair, RationalMatrix, Subspace, l0_error, plant
from l0lra.errors import ParameterError, ScaleError
from l0lra.oracle import exact_rank1
from l0lra.ptas import (ExhaustiveGuesses, ParamSet, PlantedHints, claim_clean_check, classify_blocks,
                        phase2_clean, run_ptas)


def P(k=1, eps0=F(1, 2), **kw):
    return ParamSet.from_defaults(k, eps0, **kw)


def test_paramset_defaults_and_overrides():
    p = P(2)
    assert p.delta0 == F(1, 40) and p.delta1 == F(1, 200)
    assert 1 <= p.t0 <= 20 and p.overrides == ()
    q = P(2, eps1=F(1, 5), delta2=F(1, 20))
    assert q.eps1 == F(1, 5) and q.overrides == ("delta2", "eps1")
    assert {"delta2-vs-eps1", "eps1-vs-eps0"} <= set(q.violations())
    with pytest.raises(ParameterError):
        P(1, bogus=1)
    with pytest.raises(ParameterError):
        P(1, eps0=0)
    with pytest.raises(ParameterError):
        P(1, tau=2)


def test_paramset_capped_t0_is_reported():
    # The capped sample count cannot meet the sampling bound at desk scale.
    assert "t0-sampling-bound" in P(1).violations()
    big = P(1, F(1, 2), t0=10**9)
    assert "t0-sampling-bound" not in big.violations()


def test_single_layer_labels():
    p = P()
    assert classify_blocks((10,), (10,), 0, p).labels == (("clean",),)
    s = classify_blocks((1,), (1,), 10**6, p)
    assert s.labels == (("dirty",),) and s.m_row == (0,)
    with pytest.raises(ParameterError):
        classify_blocks((1,), (1,), -1, p)


def test_two_layer_monotone_pattern():
    p = P(eps1=F(1, 5), delta2=F(1, 20))
    # opt 10: clean above 50 entries, dirty below 2.
    s = classify_blocks((40, 1), (40, 1), 10, p)
    assert s.labels == (("clean", "half_clean"), ("half_clean", "dirty"))
    assert s.m_row == (1, 0) and s.m_col == (1, 0)


def test_mixed_hyperblocks():
    p = P(eps1=F(1, 5), delta2=F(1, 20))
    s = classify_blocks((40, 1), (41,), 10, p)
    labels = {(h.row_layers, h.col_layers): h.label for h in s.hyperblocks}
    assert labels == {((0,), (0,)): "clean", ((1,), (0,)): "half_clean"}
    assert s.m_row == (1, 0)


def _monotone(labels):
    n, m = len(labels), len(labels[0])
    for i in range(n):
        for j in range(m):
            if labels[i][j] == "clean":
                assert i == 0 or labels[i - 1][j] == "clean"
                assert j == 0 or labels[i][j - 1] == "clean"
            if labels[i][j] == "dirty":
                assert i == n - 1 or labels[i + 1][j] == "dirty"
                assert j == m - 1 or labels[i][j + 1] == "dirty"


@pytest.mark.parametrize("seed", range(40))
def test_classify_invariants(seed):
    rng = random.Random(seed)
    rows = sorted((rng.randint(1, 200) for _ in range(rng.randint(1, 4))), reverse=True)
    cols = sorted((rng.randint(1, 200) for _ in range(rng.randint(1, 4))), reverse=True)
    p = P(eps1=F(1, rng.randint(2, 20)), delta2=F(1, rng.randint(2, 50)))
    s = classify_blocks(rows, cols, rng.randint(0, 300), p)
    _monotone(s.labels)
    seen_r, seen_c = set(), set()
    for h in s.half_clean():
        assert not seen_r & set(h.row_layers) and not seen_c & set(h.col_layers)
        seen_r.update(h.row_layers)
        seen_c.update(h.col_layers)
    assert all(len(h.row_layers) * len(h.col_layers) < math.inf for h in s.hyperblocks)
    covered = {(i, j) for h in s.hyperblocks for i in h.row_layers for j in h.col_layers}
    assert covered == {(i, j) for i in range(len(rows)) for j in range(len(cols))}


@pytest.mark.parametrize("seed", range(60))
def test_clean_pair_inner_product(seed):
    assert claim_clean_check(*clean_instance(random.Random(seed)))


def test_clean_pair_preconditions():
    full = [Subspace.full(2)]
    assert claim_clean_check((1, 2), (3, 4), full, full, 0, 1, 0, 1)
    with pytest.raises(ParameterError):
        claim_clean_check((1, 2), (3, 4), full, full, 0, 0, 0, 1)
    line = [Subspace.span([(1, 0)], 2)]
    with pytest.raises(ParameterError):
        claim_clean_check((0, 1), (1, 0), line, line, 0, 1, 0, 1)
    with pytest.raises(ParameterError):
        claim_clean_check((1, 0), (1, 0), [Subspace.full(2), line[0]], line, 0, 1, 0, 1)


@pytest.mark.parametrize("seed", range(6))
def test_phase2_clean_input_has_no_mistakes(seed):
    inst = plant(8, 8, 2, 0, seed)
    params = P(2)
    branch = next(PlantedHints(inst.pair).branches(inst.A, 2, params, random.Random(seed)))
    s = classify_blocks(branch.row_sizes, branch.col_sizes, branch.opt_guess, params)
    res = phase2_clean(inst.A, s, branch, 2)
    assert res.mistaken_rows == [] and res.mistaken_cols == [] and res.extra_error == 0


def test_phase2_trivial_space_gives_zeros():
    inst = plant(4, 4, 1, 1, 0)
    params = P(1)
    branch = next(PlantedHints(inst.pair).branches(inst.A, 1, params, random.Random(0)))
    s = classify_blocks(branch.row_sizes, branch.col_sizes, 10**6, params)
    res = phase2_clean(inst.A, s, branch, 1)
    assert all(v == (0,) for v in res.row_vectors.values())


@pytest.mark.parametrize("seed", range(4))
def test_ptas_exact_low_rank(seed):
    inst = plant(6, 7, 2, 0, seed)
    assert run_ptas(inst.A, 2, F(1, 2), planted=inst.pair).error == 0


@pytest.mark.parametrize("seed", range(6))
def test_ptas_hinted_rank1(seed):
    inst = plant(10, 10, 1, 2, seed)
    sol = run_ptas(inst.A, 1, F(1, 2), planted=inst.pair, seed=seed)
    _, opt = exact_rank1(inst.A, max_entries=None)
    assert opt <= sol.error <= math.ceil(F(9, 4) * 2)
    assert sol.error == l0_error(inst.A, sol.pair.product())


def test_ptas_exhaustive_tiny():
    A = RationalMatrix([[1, 2, 0, 1], [2, 4, 1, 2], [0, 1, 1, 3]])
    sol = run_ptas(A, 1, F(1, 2), mode="exhaustive")
    assert sol.error == exact_rank1(A)[1]


def test_ptas_mixed_path_and_flags():
    U = [(1, 0)] * 40 + [(0, 1)]
    W = [(1, 0)] * 41
    pair = FactorPair(RationalMatrix(U), RationalMatrix(W))
    A = pair.product()
    params = P(2, eps1=F(1, 5), delta2=F(1, 20))
    sol = run_ptas(A, 2, F(1, 2), planted=pair, params=params, diagnostics=True)
    assert sol.error == 0
    assert "params-overridden" in sol.flags
    assert any(f.startswith("param:") for f in sol.flags)


def test_ptas_mode_errors_and_branch_cap():
    inst = plant(3, 3, 1, 1, 0)
    with pytest.raises(ParameterError):
        run_ptas(inst.A, 1, F(1, 2))
    with pytest.raises(ParameterError):
        run_ptas(inst.A, 1, F(1, 2), mode="magic")
    with pytest.raises(ParameterError):
        run_ptas(inst.A, 2, F(1, 2), planted=inst.pair)
    capped = run_ptas(inst.A, 1, F(1, 2), provider=ExhaustiveGuesses(), max_branches=1)
    assert "budget-exhausted" in capped.flags


def test_exhaustive_guards():
    inst = plant(10, 10, 2, 1, 0)
    with pytest.raises(ScaleError):
        run_ptas(inst.A, 2, F(1, 2), mode="exhaustive")
    small = plant(3, 3, 1, 0, 0)
    with pytest.raises(ScaleError):
        run_ptas(small.A, 1, F(1, 2), provider=ExhaustiveGuesses(max_work=10))
