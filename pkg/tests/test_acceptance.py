"""Desk-scale acceptance suite.

Each test checks one criterion at its stated tolerance and reports a
PASS/FAIL line through the ``report`` fixture.
"""
import csv
import io
import json
import math
import random
import time
from fractions import Fraction as F
from itertools import combinations

from conforming import clean_instance, linear_instance
from l0lra.additive import count_bicliques, hinted_supercores, lemma_linear_check, run_additive
from l0lra.cli import main
from l0lra.core import RationalMatrix, Subspace, l0_error, plant
from l0lra.hardness import certify_yes, generate_exact_coverable, reduce, soundness_probe
from l0lra.layers import decompose, verify
from l0lra.oracle import exact_rank1, min_over_patterns, minor_lower_bound
from l0lra.ptas import claim_clean_check, run_ptas
from l0lra.voting import VoteInput, vote


def opt_lower_bound(A, k, planted_count):
    """Exact optimum for k = 1; for k = 2 a minor-based lower bound.

    Returns (bound, certified): certified means the bound equals the optimum.
    """
    if k == 1:
        return exact_rank1(A, max_entries=None)[1], True
    lb = minor_lower_bound(A, k, planted_count)
    return lb, lb == planted_count


def test_oracles_agree(report):
    start = time.perf_counter()
    mismatches = 0
    for seed in range(500):
        rng = random.Random(seed)
        r, c = rng.randint(1, 4), rng.randint(1, 5)
        A = RationalMatrix([[rng.choice((0, 1, 2)) for _ in range(c)] for _ in range(r)])
        if exact_rank1(A)[1] != min_over_patterns(A, 1, r * c):
            mismatches += 1
    took = time.perf_counter() - start
    ok = mismatches == 0 and took <= 300
    report(1, ok, f"exact_rank1 == min_over_patterns on 500/500 matrices ({mismatches} mismatches, {took:.1f}s)")
    assert ok


def test_additive_guarantee(report):
    start = time.perf_counter()
    passed = 0
    eps = F(1, 4)
    for seed in range(100):
        rng = random.Random(seed)
        k = rng.randint(1, 2)
        n = rng.randint(max(k, 3), 10)
        inst = plant(n, n, k, rng.randint(0, 3), seed)
        sol = run_additive(inst.A, k, eps, mode="hinted", seed=seed, hints=hinted_supercores(inst.A, inst.pair))
        lb, _ = opt_lower_bound(inst.A, k, l0_error(inst.A, inst.pair.product()))
        # lb <= OPT, so this is at least as strict as the stated bound.
        passed += lb <= sol.error <= lb + eps * n * n
    took = time.perf_counter() - start
    ok = passed == 100 and took <= 600
    report(2, ok, f"additive error <= OPT + n^2/4 in {passed}/100 runs ({took:.1f}s)")
    assert ok


def test_multiplicative_pipeline(report):
    start = time.perf_counter()
    within, below_opt, certified = 0, 0, 0
    for seed in range(50):
        rng = random.Random(seed)
        k = rng.randint(1, 2)
        n = rng.randint(max(k, 4), 12)
        errors = rng.randint(1, 3)
        inst = plant(n, n, k, errors, seed)
        sol = run_ptas(inst.A, k, F(1, 2), planted=inst.pair, seed=seed)
        within += sol.error <= math.ceil(F(3, 2) * errors)
        lb, cert = opt_lower_bound(inst.A, k, l0_error(inst.A, inst.pair.product()))
        certified += cert
        below_opt += sol.error < lb
    took = time.perf_counter() - start
    ok = within >= 48 and below_opt == 0 and took <= 900
    report(3, ok, f"ptas error <= ceil(1.5 * planted) in {within}/50 runs, "
                  f"{below_opt} below the oracle bound ({certified} certified), {took:.1f}s")
    assert ok


def layered_vote(rng, corrupt):
    k = rng.randint(1, 3)
    while True:
        B = [tuple(rng.randint(-2, 2) for _ in range(k)) for _ in range(k)]
        if Subspace.span(B, k).dim == k:
            break
    x = tuple(rng.randint(-3, 3) for _ in range(k))
    sizes = [60, 20, 10][:k]
    t = 12
    while True:
        samples = []
        for j, n in enumerate(sizes):
            pop = []
            for _ in range(n):
                # Layer j lives in the span of the first j + 1 basis vectors, outside the previous one.
                c = [rng.randint(-2, 2) for _ in range(j)] + [rng.choice((-2, -1, 1, 2))]
                u = tuple(sum(ci * B[i][d] for i, ci in enumerate(c)) for d in range(k))
                pop.append([u, sum(a * b for a, b in zip(u, x))])
            if corrupt and j == len(sizes) - 1:
                for idx in rng.sample(range(n), max(1, round(corrupt * n))):
                    pop[idx][1] += rng.choice((-1, 1)) * rng.randint(1, 5)
            samples.append([tuple(pop[rng.randrange(n)]) for _ in range(t)])
        spans = Subspace.span([u for layer in samples for u, _ in layer], k).dim == k
        if spans or corrupt:
            return VoteInput.build(k, sizes, samples), x


def test_voting_recovery(report):
    exact = sum(vote(inp)[0] == x for inp, x in (layered_vote(random.Random(s), 0) for s in range(100)))
    fails = sum(vote(inp)[0] != x for inp, x in (layered_vote(random.Random(10**4 + s), F(1, 10))
                                                 for s in range(200)))
    rate = fails / 200
    ok = exact == 100 and rate <= 0.3
    report(4, ok, f"clean recovery {exact}/100, failure rate {rate:.3f} at 10% last-layer corruption")
    assert ok


def test_inner_product_checks(report):
    lin = sum(bool(lemma_linear_check(*linear_instance(rng, rng.randint(1, 4))))
              for rng in (random.Random(s) for s in range(1000)))
    clean = sum(bool(claim_clean_check(*clean_instance(random.Random(s)))) for s in range(1000))
    ok = lin == 1000 and clean == 1000
    report(5, ok, f"linear-data check {lin}/1000, clean-pair check {clean}/1000")
    assert ok


def test_hardness_completeness(report):
    cert_ok, oracle_ok, oracle_runs, probes_ok = 0, 0, 0, 0
    cases = [(1, m, s) for m in (4, 5, 6) for s in range(7)][:20] + [(2, m, s) for m in (5, 6) for s in range(5)]
    for k, m, seed in cases:
        inst, cover = generate_exact_coverable(m - k, m, seed, k=k)
        out = reduce(inst)
        pair, err = certify_yes(out, cover)
        cert_ok += err == len(cover)
        probes_ok += soundness_probe(out, pair).status == "cover"
        if k == 1:
            oracle_runs += 1
            best, opt = exact_rank1(out.M, max_entries=None)
            oracle_ok += opt == len(cover) and soundness_probe(out, best).status == "cover"
    ok = cert_ok == len(cases) == 30 and oracle_ok == oracle_runs == 20 and probes_ok == 30
    report(6, ok, f"certificate error = cover size {cert_ok}/30, rank-1 oracle OPT = cover size "
                  f"{oracle_ok}/{oracle_runs}, probe recovers a cover {probes_ok}/30")
    assert ok


def brute_full(decomp, vectors, delta0):
    """Every span of the previous space plus a few layer vectors, below the layer's space, keeps too little."""
    k = decomp.k
    prev = Subspace.zero(k)
    for J, T in zip(decomp.layers, decomp.subspaces):
        nz = [vectors[i] for i in J if any(vectors[i])]
        distinct = sorted(set(nz))
        for r in range(1, min(k, len(distinct)) + 1):
            for combo in combinations(distinct, r):
                S = Subspace.span(list(prev.basis) + list(combo), k)
                if S.dim >= T.dim:
                    continue
                if sum(S.contains(v) for v in nz) >= (1 - delta0) * len(nz):
                    return False
        if T.dim > prev.dim and nz and sum(prev.contains(v) for v in nz) >= (1 - delta0) * len(nz):
            return False
        prev = T
    return True


def test_layer_decomposition(report):
    delta0 = F(1, 40)
    verified, full = 0, 0
    for seed in range(200):
        rng = random.Random(seed)
        k = rng.randint(1, 3)
        dirs = [tuple(rng.randint(-2, 2) for _ in range(k)) for _ in range(rng.randint(1, 4))]
        vs = [tuple(rng.choice((1, 2, F(1, 2))) * x for x in rng.choice(dirs)) for _ in range(rng.randint(1, 60))]
        d = decompose(vs, delta0, k)
        verified += verify(d, vs, delta0)
        full += brute_full(d, vs, delta0)
    ok = verified == 200 and full == 200
    report(7, ok, f"verify passes {verified}/200, exhaustive fullness {full}/200")
    assert ok


def brute_bicliques(adj, a, b, n_right):
    return sum(all(y in adj[x] for x in L for y in R)
               for L in combinations(range(len(adj)), a) for R in combinations(range(n_right), b))


def test_biclique_counts(report):
    agree = 0
    for seed in range(100):
        rng = random.Random(seed)
        n1, n2 = rng.randint(1, 8), rng.randint(1, 8)
        p = rng.random()
        adj = [{y for y in range(n2) if rng.random() < p} for _ in range(n1)]
        a, b = rng.randint(1, 3), rng.randint(1, 3)
        agree += count_bicliques(adj, a, b, n2) == brute_bicliques(adj, a, b, n2)
    k33 = count_bicliques([{0, 1, 2}] * 3, 2, 2, 3)
    ok = agree == 100 and k33 == 9
    report(8, ok, f"brute-force agreement {agree}/100, K_3,3 with a = b = 2 gives {k33}")
    assert ok


def _strip_times(path):
    data = json.loads(path.read_text())
    for run in data["solvers"]:
        run.pop("time_ms")
        run.pop("witness")
    return data


def _strip_csv(path):
    return [{c: v for c, v in row.items() if c != "time_ms"} for row in csv.DictReader(io.StringIO(path.read_text()))]


def test_cli_determinism(report, tmp_path):
    same = {}
    runs = []
    for tag in ("a", "b"):
        d = tmp_path / tag
        d.mkdir()
        codes = [
            main(["gen", "--n", "6", "--k", "2", "--errors", "2", "--seed", "3", "--out", str(d / "inst.txt")]),
            main(["solve", str(d / "inst.txt"), "--k", "2", "--seed", "3", "--out", str(d / "run.json")]),
        ]
        (d / "sc.txt").write_text("4 5\n1 2\n3 4\n1 3\n2 4\n1 2 3 4\n")
        codes.append(main(["reduce", str(d / "sc.txt"), "--out", str(d / "M.txt"), "--cover", "1,2",
                           "--summary", str(d / "sum.json")]))
        codes.append(main(["bench", "--sizes", "3-5", "--ks", "1,2", "--errors", "0-1", "--seeds", "0-1",
                           "--out", str(d / "bench.csv")]))
        runs.append((d, codes))
    (a, ca), (b, cb) = runs
    ok_codes = ca == cb == [0, 0, 0, 0]
    for name in ("inst.txt", "inst.txt.planted.json", "M.txt", "M.txt.certificate"):
        same[name] = (a / name).read_bytes() == (b / name).read_bytes()
    same["sum.json"] = (json.loads((a / "sum.json").read_text()) | {"certificate": None}) == \
                       (json.loads((b / "sum.json").read_text()) | {"certificate": None})
    same["run.json"] = _strip_times(a / "run.json") | {"instance": None} == _strip_times(b / "run.json") | {"instance": None}
    for solver in ("exact_rank1", "finite_alphabet", "additive", "ptas"):
        wa, wb = a / f"run.json.{solver}.witness", b / f"run.json.{solver}.witness"
        if wa.exists() or wb.exists():
            same[wa.name] = wa.exists() and wb.exists() and wa.read_bytes() == wb.read_bytes()
    same["bench.csv"] = _strip_csv(a / "bench.csv") == _strip_csv(b / "bench.csv")
    ok = ok_codes and all(same.values())
    differing = [k for k, v in same.items() if not v]
    report(9, ok, f"{len(same) - len(differing)}/{len(same)} artifacts identical across two runs"
                  + (f", differing: {differing}" if differing else ""))
    assert ok
