"""Recovering one vector from noisy weighted samples of its inner products.

Each layer j contributes samples (u_s, a_s) claiming <x, u_s> = a_s, and a
mismatch in layer j costs n_j / t_j (layer size over sample count). The
vote returns the exact minimizer of that cost over Q^k: any minimizer
satisfies some set of samples, and the minimum-norm solution of an
independent subset with the same span satisfies them too.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .core import Subspace, dot, independent, project, solve_min_norm, vec, zero_vec
from .errors import DimensionError, ParameterError


@dataclass(frozen=True)
class VoteInput:
    k: int
    layer_sizes: tuple
    samples: tuple  # per layer: tuple of (vector, value)

    @classmethod
    def build(cls, k: int, layer_sizes: Sequence[int], samples: Sequence) -> "VoteInput":
        if len(layer_sizes) != len(samples):
            raise DimensionError("one sample list per layer is required")
        out = []
        for j, layer in enumerate(samples):
            if layer_sizes[j] and not layer:
                raise ParameterError(f"layer {j} is nonempty but has no samples")
            pairs = []
            for u, a in layer:
                u = vec(u)
                if len(u) != k:
                    raise DimensionError(f"sample vector of length {len(u)}, expected {k}")
                pairs.append((u, Fraction(a)))
            out.append(tuple(pairs))
        return cls(k, tuple(int(n) for n in layer_sizes), tuple(out))

    def weights(self) -> tuple:
        return tuple(Fraction(n, len(s)) if s else Fraction(0)
                     for n, s in zip(self.layer_sizes, self.samples))


def estimated_error(x: Sequence, inp: VoteInput) -> Fraction:
    x = vec(x)
    total = Fraction(0)
    for w, layer in zip(inp.weights(), inp.samples):
        if w:
            total += w * sum(dot(x, u) != a for u, a in layer)
    return total


def candidates(inp: VoteInput, subspace: Subspace | None = None) -> list:
    """Zero plus the minimum-norm solution of every independent sample subset of size <= k."""
    k = inp.k
    pairs = []
    seen = set()
    for layer in inp.samples:
        for u, a in layer:
            if subspace is not None:
                u = project(u, subspace)
            if (u, a) not in seen and any(u):
                seen.add((u, a))
                pairs.append((u, a))
    max_size = k if subspace is None else subspace.dim
    found = {zero_vec(k)}
    for size in range(1, max_size + 1):
        for combo in combinations(pairs, size):
            vs = [u for u, _ in combo]
            if not independent(vs, k):
                continue
            x = solve_min_norm(vs, [a for _, a in combo], k)
            found.add(x)
    return sorted(found)


def vote(inp: VoteInput, subspace: Subspace | None = None):
    """Minimize the layer-weighted mismatch count.

    With ``subspace`` the search is restricted to it: each sample vector is
    replaced by its projection, which leaves <x, u> unchanged for x inside.
    Ties go to the lexicographically smallest vector.
    Returns ``(x, objective)``.
    """
    if subspace is not None and subspace.ambient_dim != inp.k:
        raise DimensionError("subspace lives in the wrong ambient space")
    proj = inp
    if subspace is not None:
        proj = VoteInput(inp.k, inp.layer_sizes, tuple(
            tuple((project(u, subspace), a) for u, a in layer) for layer in inp.samples))
    best = None
    for x in candidates(proj, None if subspace is None else subspace):
        obj = estimated_error(x, proj)
        if best is None or (obj, x) < best:
            best = (obj, x)
    return best[1], best[0]


def _affine_hulls(points: list, k: int, max_pts: int):
    """Distinct affine hulls of subsets of ``points`` with at most ``max_pts`` points."""
    hulls = {}
    for size in range(1, max_pts + 1):
        for combo in combinations(points, size):
            base = combo[0]
            S = Subspace.span([tuple(a - b for a, b in zip(p, base)) for p in combo[1:]], k)
            if S.dim != size - 1:
                continue
            off = tuple(a - b for a, b in zip(base, project(base, S)))
            hulls[(S.basis, off)] = (S, base)
    return list(hulls.values())


def tau_good(vectors: Sequence, layers, samples: Sequence, tau) -> bool:
    """Check that each layer's samples hit every affine hull of the layer's
    own vectors in the right proportion, up to ``tau``.

    ``samples[j]`` lists indices (repeats allowed) drawn from layer j.
    """
    tau = Fraction(tau)
    vs = [vec(v) for v in vectors]
    k = layers.k
    if len(samples) != layers.n_layers:
        raise DimensionError("one sample list per layer is required")
    for j, (J, T) in enumerate(zip(layers.layers, layers.subspaces)):
        sj = list(samples[j])
        if not sj:
            if J:
                return False
            continue
        if any(i not in set(J) for i in sj):
            raise ParameterError(f"sample outside layer {j}")
        pts = sorted({vs[i] for i in J})
        for S, base in _affine_hulls(pts, k, T.dim + 1):
            def inside(i):
                return S.contains(tuple(a - b for a, b in zip(vs[i], base)))
            pop = Fraction(sum(map(inside, J)), len(J))
            smp = Fraction(sum(map(inside, sj)), len(sj))
            if abs(pop - smp) > tau:
                return False
    return True
