import pytest

from l0lra.core import FactorPair, RationalMatrix, rank
from l0lra.errors import CertificateError, DimensionError, IdentifiedNo, ParameterError, ParseError
from l0lra.hardness import (SetCoverInstance, certify_yes, generate_exact_coverable, incidence_matrix,
                            kernel_basis, min_cover_size, parse_set_cover, reduce, serialize_set_cover,
                            soundness_probe)
from l0lra.oracle import exact_rank1

SMALL = SetCoverInstance.build(2, [[1], [2], [1, 2]])


def test_small_reduction_layout():
    out = reduce(SMALL)
    assert incidence_matrix(SMALL) == RationalMatrix([[1, 0, 1], [0, 1, 1]])
    assert out.k == 1 and out.kernel_basis == ((-1, -1, 1),)
    assert out.w == (-1, -1, 0)
    assert out.M.shape == (3, 5)
    assert out.M.col(4) == (-1, -1, 0)
    assert all(out.M.col(q) == (-1, -1, 1) for q in range(4))


def test_small_certificate_and_probe():
    out = reduce(SMALL)
    pair, err = certify_yes(out, [2])
    assert err == 1
    assert pair.product().col(4) == (-1, -1, 1)
    d = soundness_probe(out, pair)
    assert d.status == "cover" and d.cover == (2,)
    pair2, err2 = certify_yes(out, [0, 1])
    assert err2 == 2 and soundness_probe(out, pair2).cover == (0, 1)


def test_certificate_rejects_non_covers():
    out = reduce(SMALL)
    for bad in ([0], [0, 2], [5], [2, 2]):
        with pytest.raises(CertificateError):
            certify_yes(out, bad)


def test_probe_statuses():
    out = reduce(SMALL)
    zero = FactorPair(RationalMatrix.zeros(3, 1), RationalMatrix.zeros(5, 1))
    d = soundness_probe(out, zero)
    assert d.status == "error-exceeds-m" and d.error == 14
    with pytest.raises(DimensionError):
        soundness_probe(out, FactorPair(RationalMatrix.zeros(2, 1), RationalMatrix.zeros(5, 1)))
    pair, _ = exact_rank1(out.M)
    assert soundness_probe(out, pair).status == "cover"


def test_identified_no():
    # Element 3 is in no set, so the linear system is inconsistent.
    inst = SetCoverInstance.build(3, [[1, 2], [1]])
    with pytest.raises(IdentifiedNo):
        reduce(inst)


def test_full_rank_incidence_gives_rank_zero():
    inst = SetCoverInstance.build(2, [[1], [2]])
    out = reduce(inst)
    assert out.k == 0 and kernel_basis(incidence_matrix(inst)) == []
    pair, err = certify_yes(out, [0, 1])
    assert err == 2 and rank(pair.product()) == 0


def test_parse_and_serialize_roundtrip():
    text = "3 2\n1 2\n3\n"
    inst = parse_set_cover(text)
    assert inst.sets == (frozenset({1, 2}), frozenset({3}))
    assert serialize_set_cover(inst) == text
    assert parse_set_cover(serialize_set_cover(SMALL)) == SMALL


@pytest.mark.parametrize("text", ["", "3\n1\n", "2 2\n1\n", "2 1\n1 x\n", "2 1\n\n", "2 1\n3\n"])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_set_cover(text)


def test_instance_validation():
    with pytest.raises(ParameterError):
        SetCoverInstance.build(0, [])
    assert SMALL.is_exact_cover([2]) and not SMALL.is_exact_cover([0, 2])
    assert min_cover_size(SMALL) == 1


def test_reduction_is_deterministic():
    a, b = reduce(SMALL), reduce(SetCoverInstance.build(2, [[1], [2], [1, 2]]))
    assert a == b


@pytest.mark.parametrize("seed", range(8))
def test_generated_instances(seed):
    inst, cover = generate_exact_coverable(5, 5, seed, k=1)
    assert inst.is_exact_cover(cover)
    assert min_cover_size(inst) == len(cover)
    out = reduce(inst)
    assert out.k == 1
    _, err = certify_yes(out, cover)
    assert err == len(cover)
    assert generate_exact_coverable(5, 5, seed, k=1) == (inst, cover)


@pytest.mark.parametrize("seed", range(4))
def test_generated_rank1_optimum_matches_cover(seed):
    inst, cover = generate_exact_coverable(4, 4, seed, k=1)
    out = reduce(inst)
    pair, opt = exact_rank1(out.M, max_entries=None)
    assert opt == len(cover)
    d = soundness_probe(out, pair)
    assert d.status == "cover" and inst.is_cover(d.cover)
