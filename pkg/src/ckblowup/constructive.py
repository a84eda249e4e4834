"""Randomized pipeline that assembles transversal cycle factors of
dense blow-ups: an absorbing structure, a round tiler that converts one
vertex pool into disjoint cycles per round while handing a same-size
pool to the next round, and the driver that chains them and absorbs the
leftover.

Conventions shared by this module:

* Vertex pools are dicts mapping parts to index lists; every randomized
  routine takes a ``numpy.random.Generator`` so runs are reproducible
  from a seed.
* Degree thresholds are compared exactly (the float inputs are turned
  into Fractions), so borderline pools are accepted or rejected
  deterministically.
* Rejection-sampled stages retry up to a bound and then raise
  StageFailure naming the stage; the driver never returns a tiling that
  fails validation.
* Pool splits draw a random vertex order but then place vertices so
  that, for every vertex of the two adjacent parts, its non-neighbors
  spread evenly across chunks; the split is still verified against the
  stated degree conditions and resampled on failure.  A uniform split
  obeys the same conditions only for pools far larger than the desk
  scales used here.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .core import (
    BlowupGraph,
    PreconditionError,
    VertexRef,
    degree_profile,
    part_after,
    part_before,
    validate_tiling,
)
from .exact import enumerate_linking, has_factor, max_tiling
from .matching import max_matching_matrix


class PoolConditionError(PreconditionError):
    """An input pool misses the degree condition a stage relies on."""

    def __init__(self, message, violations=None):
        super().__init__(message)
        self.violations = violations or []


class StageFailure(Exception):
    """A randomized stage exhausted its retry budget."""

    def __init__(self, stage: str, message: str, details=None):
        super().__init__(f"{stage}: {message}")
        self.stage = stage
        self.details = details


def _require_rng(rng) -> np.random.Generator:
    if not isinstance(rng, np.random.Generator):
        raise PreconditionError("rng must be a numpy.random.Generator")
    return rng


def _pool_mask(G: BlowupGraph, part: int, ids: Sequence[int]) -> np.ndarray:
    mask = np.zeros(G.n, dtype=bool)
    for i in ids:
        if not 0 <= int(i) < G.n:
            raise PreconditionError(f"vertex index {i} out of range for part {part}")
        if mask[int(i)]:
            raise PreconditionError(f"duplicate vertex {i} in pool for part {part}")
        mask[int(i)] = True
    return mask


def _degrees_into(G: BlowupGraph, vpart: int, tpart: int, tmask: np.ndarray) -> np.ndarray:
    """Degrees of every vertex of V_vpart into the masked subset of the
    adjacent part V_tpart."""
    if tpart == part_after(G.k, vpart):
        return G.pair_matrix(vpart)[:, tmask].sum(axis=1)
    if vpart == part_after(G.k, tpart):
        return G.pair_matrix(tpart)[tmask, :].sum(axis=0)
    raise PreconditionError(f"parts {vpart} and {tpart} are not adjacent")


def _check_pool_degrees(G, pools: dict, need: Fraction, label: str) -> list:
    """All violations of d(v, pool_i) >= need for v in the parts
    adjacent to i, as (part, neighbor part, vertex, degree)."""
    bad = []
    for i, ids in pools.items():
        mask = _pool_mask(G, i, ids)
        for q in (part_before(G.k, i), part_after(G.k, i)):
            degs = _degrees_into(G, q, i, mask)
            for v in np.flatnonzero(degs < need):
                bad.append((i, q, int(v), int(degs[v])))
                if len(bad) >= 20:
                    return bad
    return bad


def _balanced_split(G: BlowupGraph, part: int, pool: Sequence[int], nchunks: int,
                    chunk_size: int, rng: np.random.Generator) -> list:
    """Split ``pool`` into chunks of ``chunk_size``, spreading every
    adjacent vertex's non-neighbors evenly across chunks.  Vertices are
    taken in a random order; ties go to the lowest chunk."""
    pool = list(pool)
    rows = []
    for q in (part_before(G.k, part), part_after(G.k, part)):
        if part == part_after(G.k, q):
            rows.append(G.pair_matrix(q)[:, pool])
        else:
            rows.append(G.pair_matrix(part)[pool, :].T)
    non_adj = ~np.vstack(rows)  # (#external, |pool|)
    counts = np.zeros((non_adj.shape[0], nchunks), dtype=int)
    caps = np.full(nchunks, chunk_size, dtype=int)
    chunks = [[] for _ in range(nchunks)]
    for pos in rng.permutation(len(pool)):
        col = non_adj[:, pos]
        if col.any():
            scores = counts[col].max(axis=0).astype(float)
        else:
            scores = np.zeros(nchunks)
        scores[caps == 0] = np.inf
        c = int(np.argmin(scores))
        chunks[c].append(pool[pos])
        caps[c] -= 1
        counts[col, c] += 1
    return [sorted(ch) for ch in chunks]


# ---------------------------------------------------------------------------
# round tiler
# ---------------------------------------------------------------------------


@dataclass
class RoundResult:
    cycles: list
    U_prime: dict
    used_W: dict
    resplits: int
    millis: float


def round_tiling(G: BlowupGraph, U: dict, W: dict, sigma,
                 rng: np.random.Generator, max_resplits: int = 50) -> RoundResult:
    """One production round: covers all of U and one k-th of each W_i by
    mk disjoint transversal cycles and returns the replacement pool.

    Inputs are pools U_i, W_i of equal size mk inside each part, with
    every vertex of the two adjacent parts having degree at least
    (1+sigma)mk/2 into U_i and (1+1/k+sigma)mk/2 into W_i.  Each U_i is
    split into k chunks of size m such that chunk degrees stay at least
    m/2 (resampled until they do); chained perfect matchings between
    consecutive chunks yield, for each j, m disjoint paths through the
    chunks U_{i,j} with i != j, which are closed into cycles through
    fresh vertices of W_j.  The replacement pool U'_i is the untouched
    chunk U_{i,i} plus the unused part of W_i; it has size mk again and
    every adjacent vertex keeps degree at least (1+sigma)mk/2 into it.
    """
    _require_rng(rng)
    start = time.monotonic()
    k, n = G.k, G.n
    if k < 3:
        raise PreconditionError("round tiling needs k >= 3")
    sig = Fraction(sigma)
    if set(U) != set(range(1, k + 1)) or set(W) != set(range(1, k + 1)):
        raise PreconditionError("U and W must cover parts 1..k")
    mk = len(U[1])
    if mk == 0 or mk % k:
        raise PreconditionError(f"pool size {mk} must be a positive multiple of k")
    m = mk // k
    for i in range(1, k + 1):
        if len(U[i]) != mk or len(W[i]) != mk:
            raise PreconditionError("all pools must have the same size")
        if set(U[i]) & set(W[i]):
            raise PreconditionError(f"U_{i} and W_{i} overlap")
    need_U = (1 + sig) * mk / 2
    need_W = (1 + Fraction(1, k) + sig) * mk / 2
    bad = _check_pool_degrees(G, U, need_U, "U")
    if bad:
        raise PoolConditionError(
            f"degree into U pools below (1+sigma)mk/2 = {need_U}", bad)
    bad = _check_pool_degrees(G, W, need_W, "W")
    if bad:
        raise PoolConditionError(
            f"degree into W pools below (1+1/k+sigma)mk/2 = {need_W}", bad)

    # split each U_i into k chunks of m with chunk degrees >= m/2
    need_chunk = Fraction(m, 2)
    resplits = 0
    chunks: Dict[int, list] = {}
    for i in range(1, k + 1):
        for attempt in range(max_resplits + 1):
            cand = _balanced_split(G, i, U[i], k, m, rng)
            ok = True
            for ch in cand:
                if _check_pool_degrees(G, {i: ch}, need_chunk, "chunk"):
                    ok = False
                    break
            if ok:
                chunks[i] = cand
                break
            resplits += 1
        else:
            raise StageFailure("split", f"no valid chunk split of U_{i} "
                               f"after {max_resplits} attempts")

    # perfect matchings between consecutive chunks with the same label
    follow: Dict[Tuple[int, int], dict] = {}
    for j in range(k):
        for i in range(1, k + 1):
            nxt = part_after(k, i)
            mm = max_matching_matrix(G.pair_matrix(i), chunks[i][j], chunks[nxt][j])
            if len(mm) != m:
                raise StageFailure(
                    "matching",
                    f"no perfect matching between chunks {i},{j + 1} and {nxt},{j + 1} "
                    "although chunk degrees are at least m/2")
            follow[(i, j)] = mm

    cycles = []
    used_W = {i: [] for i in range(1, k + 1)}
    for j in range(k):
        jpart = j + 1
        first = part_after(k, jpart)
        last = part_before(k, jpart)
        wmask = _pool_mask(G, jpart, W[jpart])
        paths = []
        for x in chunks[first][j]:
            path = {first: x}
            p, v = first, x
            while p != last:
                v = follow[(p, j)][v]
                p = part_after(k, p)
                path[p] = v
            paths.append(path)
        # close each path through a fresh vertex of W_j; the degree
        # condition leaves at least sigma*mk + 1 candidates at every step
        for path in sorted(paths, key=lambda d: d[first]):
            x, y = path[first], path[last]
            cand = wmask & G.pair_matrix(jpart)[:, x] & G.pair_matrix(last)[y, :]
            ws = np.flatnonzero(cand)
            if ws.size == 0:
                raise StageFailure(
                    "closure", f"no common neighbor left in W_{jpart} for a path, "
                               "violating the (1/k+sigma)mk surplus")
            w = int(ws[0])
            wmask[w] = False
            used_W[jpart].append(w)
            path[jpart] = w
            cycles.append(tuple(path[p] for p in range(1, k + 1)))

    U_prime = {}
    for i in range(1, k + 1):
        rest = sorted(set(W[i]) - set(used_W[i]))
        U_prime[i] = sorted(chunks[i][i - 1] + rest)
        if len(U_prime[i]) != mk:
            raise StageFailure("replacement", f"U'_{i} has size {len(U_prime[i])}")
    bad = _check_pool_degrees(G, U_prime, need_U, "U'")
    if bad:
        raise StageFailure(
            "replacement", "replacement pool misses (1+sigma)mk/2", bad)
    if len(cycles) != mk:
        raise StageFailure("replacement", f"{len(cycles)} cycles instead of {mk}")
    err = validate_tiling(G, cycles)
    if err is not None:
        raise StageFailure("replacement", f"invalid round tiling: {err}")
    millis = (time.monotonic() - start) * 1000.0
    return RoundResult(sorted(cycles), U_prime, used_W, resplits, millis)


# ---------------------------------------------------------------------------
# absorbers
# ---------------------------------------------------------------------------


@dataclass
class Gadget:
    """k disjoint transversal cycles whose designated vertices c_1..c_k
    (c_i on cycle i, in part i) themselves form a transversal cycle.

    The gadget tiles its own k*k vertices by its k cycles.  It absorbs a
    transversal (u_1, ..., u_k) whose u_i is adjacent to both cycle
    neighbors of c_i: each u_i substitutes for c_i on cycle i and the
    freed c_1..c_k close up as the (k+1)-st cycle.
    """

    anchors: tuple
    cycles: list

    def vertex_refs(self) -> list:
        out = []
        for cyc in self.cycles:
            out.extend(VertexRef(p + 1, idx) for p, idx in enumerate(cyc))
        return out

    def can_absorb(self, G: BlowupGraph, trans: Sequence[int]) -> bool:
        k = G.k
        for i in range(1, k + 1):
            u = trans[i - 1]
            cyc = self.cycles[i - 1]
            nxt = cyc[part_after(k, i) - 1]
            prv = cyc[part_before(k, i) - 1]
            if not (G.pair_matrix(i)[u, nxt] and G.pair_matrix(part_before(k, i))[prv, u]):
                return False
            if u == cyc[i - 1]:
                return False
        return True

    def own_cycles(self) -> list:
        return [tuple(c) for c in self.cycles]

    def absorb_cycles(self, G: BlowupGraph, trans: Sequence[int]) -> list:
        out = [tuple(self.anchors)]
        for i in range(1, G.k + 1):
            cyc = list(self.cycles[i - 1])
            cyc[i - 1] = trans[i - 1]
            out.append(tuple(cyc))
        return out


@dataclass
class SampledAbsorber:
    """A patterned vertex tuple kept because its vertex set tiles itself;
    it absorbs exactly the transversals whose union with it still tiles."""

    vertices: dict  # part -> tuple of indices

    def vertex_refs(self) -> list:
        return [VertexRef(p, i) for p, ids in sorted(self.vertices.items()) for i in ids]

    def _alive(self, G, extra=None):
        masks = [np.zeros(G.n, dtype=bool) for _ in range(G.k)]
        for p, ids in self.vertices.items():
            masks[p - 1][list(ids)] = True
        if extra is not None:
            for p, idx in enumerate(extra, start=1):
                masks[p - 1][idx] = True
        return masks

    def can_absorb(self, G: BlowupGraph, trans: Sequence[int]) -> bool:
        for p, idx in enumerate(trans, start=1):
            if idx in self.vertices[p]:
                return False
        return has_factor(G, alive=self._alive(G, trans))

    def own_cycles(self) -> list:
        return list(self._own)

    def absorb_cycles(self, G: BlowupGraph, trans: Sequence[int]) -> list:
        size = len(self.vertices[1]) + 1
        res = max_tiling(G, alive=self._alive(G, trans), stop_at=size)
        if res.size != size:
            raise StageFailure("absorption", "absorber cannot tile itself with "
                                             "the transversal it accepted")
        return res.cycles


@dataclass
class AbsorberSet:
    mode: str
    t: int
    sigma: float
    absorbers: list

    @property
    def capacity(self) -> int:
        return len(self.absorbers)

    def vertices(self) -> dict:
        out: Dict[int, list] = {}
        for a in self.absorbers:
            for ref in a.vertex_refs():
                out.setdefault(ref.part, []).append(ref.index)
        return {p: sorted(ids) for p, ids in sorted(out.items())}


def _random_path(G, rng, avail, start_part, start_idx, length, close_to=None):
    """Random walk of ``length`` further vertices from a start vertex,
    one part per step, inside ``avail``; the last vertex must also see
    ``close_to`` backwards if given.  Returns the list of new indices or
    None on a dead end."""
    k = G.k
    out = []
    p, v = start_part, start_idx
    for step in range(length):
        q = part_after(k, p)
        mask = G.pair_matrix(p)[v] & avail[q - 1]
        if step == length - 1 and close_to is not None:
            mask = mask & G.pair_matrix(q)[:, close_to]
        cand = np.flatnonzero(mask)
        if cand.size == 0:
            return None
        v = int(rng.choice(cand))
        p = q
        out.append(v)
    return out


def _build_gadget(G, rng, avail, tries: int = 60, proposals: int = 3):
    """One gadget on unused vertices, keeping the best of a few
    proposals by the size of the absorbable neighborhoods around its
    anchors (larger common neighborhoods absorb more transversals)."""
    k = G.k
    best = None
    best_score = -1.0
    found = 0
    for _ in range(tries):
        starts = np.flatnonzero(avail[0])
        if starts.size == 0:
            return None
        c1 = int(rng.choice(starts))
        rest = _random_path(G, rng, avail, 1, c1, k - 1, close_to=c1)
        if rest is None:
            continue
        anchors = (c1, *rest)
        work = [m.copy() for m in avail]
        for p, idx in enumerate(anchors):
            work[p][idx] = False
        cycles = []
        for i in range(1, k + 1):
            ext = _random_path(G, rng, work, i, anchors[i - 1], k - 1,
                               close_to=anchors[i - 1])
            if ext is None:
                cycles = None
                break
            cyc = [0] * k
            cyc[i - 1] = anchors[i - 1]
            p = i
            for idx in ext:
                p = part_after(k, p)
                cyc[p - 1] = idx
                work[p - 1][idx] = False
            cycles.append(tuple(cyc))
        if cycles is None:
            continue
        gadget = Gadget(anchors, cycles)
        score = 1.0
        for i in range(1, k + 1):
            cyc = gadget.cycles[i - 1]
            nxt = cyc[part_after(k, i) - 1]
            prv = cyc[part_before(k, i) - 1]
            common = (G.pair_matrix(i)[:, nxt] & G.pair_matrix(part_before(k, i))[prv, :])
            score *= float(common.sum()) / G.n
        if score > best_score:
            best_score = score
            best = gadget
        found += 1
        if found >= proposals:
            break
    return best


def build_absorber(G: BlowupGraph, sigma, rng: np.random.Generator, *,
                   mode: str = "greedy", t: Optional[int] = None,
                   eta=None, count: Optional[int] = None,
                   max_retries: int = 50) -> AbsorberSet:
    """Absorbing structure with one absorber per unit of capacity.

    greedy mode (the default) builds ``count`` vertex-disjoint gadgets
    with t = k-1; when ``eta`` is given it first spot-checks that a few
    same-part pairs have at least eta*n^t linking sequences.  faithful
    mode follows the sampling recipe: it requires sigma below the
    bound 0.1 * eta^(k+1) / ((k(t+1))^2 + 1) (raising PreconditionError
    otherwise), draws a number of patterned tuples that is Poisson with
    mean 0.2*sigma*n, discards tuples with repeated vertices, both
    members of every intersecting pair, and tuples whose vertex set does
    not tile itself, and checks the per-part footprint stays at most
    sigma*n.
    """
    _require_rng(rng)
    k, n = G.k, G.n
    if t is None:
        t = k - 1
    if (t + 1) % k:
        raise PreconditionError(f"t+1 = {t + 1} must be a multiple of k = {k}")
    sig = Fraction(sigma)
    if not 0 < sig < 1:
        raise PreconditionError("sigma must lie in (0, 1)")

    if mode == "faithful":
        if eta is None:
            raise PreconditionError("faithful mode needs eta")
        ell = k * (t + 1)
        bound = Fraction(1, 10) * Fraction(eta) ** (k + 1) / (ell * ell + 1)
        if sig > bound:
            raise PreconditionError(
                f"sigma = {sigma} exceeds the sampling bound {float(bound):.3e} "
                f"for eta = {eta}, t = {t}")
        lam = 0.2 * float(sig) * n
        draws = int(rng.poisson(lam))
        tuples = []
        for _ in range(draws):
            seq = tuple(int(x) for x in rng.integers(0, n, size=ell))
            tuples.append(seq)
        kept = []
        seen_sets = []
        for seq in tuples:
            byp: Dict[int, list] = {p: [] for p in range(1, k + 1)}
            for pos, idx in enumerate(seq):
                byp[pos % k + 1].append(idx)
            if any(len(set(ids)) != len(ids) for ids in byp.values()):
                continue
            kept.append({p: tuple(sorted(ids)) for p, ids in byp.items()})
        refs = [set((p, i) for p, ids in v.items() for i in ids) for v in kept]
        disjoint = []
        for a, va in enumerate(kept):
            if all(a == b or not (refs[a] & refs[b]) for b in range(len(kept))):
                disjoint.append(va)
        final = []
        for v in disjoint:
            masks = [np.zeros(n, dtype=bool) for _ in range(k)]
            for p, ids in v.items():
                masks[p - 1][list(ids)] = True
            res = max_tiling(G, alive=masks, stop_at=t + 1)
            if res.size == t + 1:
                ab = SampledAbsorber(v)
                ab._own = res.cycles
                final.append(ab)
        if Fraction((t + 1) * len(final)) > sig * n:
            raise StageFailure("absorber", "sampled absorber footprint exceeds "
                                           "sigma*n per part")
        return AbsorberSet("faithful", t, float(sigma), final)

    if mode != "greedy":
        raise PreconditionError(f"unknown absorber mode {mode!r}")
    if t != k - 1:
        raise PreconditionError("greedy gadgets are built for t = k-1")
    if count is None:
        count = max(1, math.ceil(sig * sig * n))
    if eta is not None:
        # spot check: a couple of pairs must reach eta*n^t linking
        # sequences, counting no further than a small work bound
        cap = min(math.ceil(Fraction(eta) * n**t), 5000)
        probes = [(VertexRef(1, 0), VertexRef(1, 0))]
        if n > 1:
            a, b = sorted(int(x) for x in rng.choice(n, size=2, replace=False))
            probes.append((VertexRef(1, a), VertexRef(1, b)))
        for v, v2 in probes:
            got = enumerate_linking(G, v, v2, t, cap=cap)
            if got.complete and got.count < cap:
                raise PreconditionError(
                    f"pair {v}, {v2} has only {got.count} linking sequences "
                    f"(needs {cap}); the graph is not (eta, t)-linked")
    avail = [np.ones(n, dtype=bool) for _ in range(k)]
    gadgets = []
    attempts = 0
    while len(gadgets) < count:
        g = _build_gadget(G, rng, avail)
        if g is None:
            attempts += 1
            if attempts > max_retries:
                raise StageFailure(
                    "absorber", f"built {len(gadgets)} of {count} gadgets before "
                                "running out of vertex-disjoint candidates")
            continue
        for ref in g.vertex_refs():
            avail[ref.part - 1][ref.index] = False
        gadgets.append(g)
    return AbsorberSet("greedy", t, float(sigma), gadgets)


def _normalize_W(G: BlowupGraph, W) -> dict:
    if isinstance(W, dict):
        out = {p: sorted(int(i) for i in ids) for p, ids in W.items()}
    else:
        out = {}
        for p, i in W:
            out.setdefault(int(p), []).append(int(i))
        out = {p: sorted(ids) for p, ids in out.items()}
    for p in range(1, G.k + 1):
        out.setdefault(p, [])
    return out


def _assign_and_assemble(G: BlowupGraph, absorber: AbsorberSet, W: dict):
    """Pair off W into index-aligned transversals, match them to
    distinct absorbers, and return the cycles tiling A union W, or an
    explanation string."""
    sizes = {p: len(W[p]) for p in range(1, G.k + 1)}
    if len(set(sizes.values())) != 1:
        return None, f"W is unbalanced across parts: {sizes}"
    L = sizes[1]
    if L > absorber.capacity:
        return None, f"|W per part| = {L} exceeds capacity {absorber.capacity}"
    own = {p: set(ids) for p, ids in absorber.vertices().items()}
    for p in range(1, G.k + 1):
        overlap = own.get(p, set()) & set(W[p])
        if overlap:
            return None, f"W meets the absorber in part {p}: {sorted(overlap)}"
    transversals = [tuple(W[p][j] for p in range(1, G.k + 1)) for j in range(L)]
    adj = np.zeros((L, absorber.capacity), dtype=bool)
    for a, trans in enumerate(transversals):
        for b, g in enumerate(absorber.absorbers):
            adj[a, b] = g.can_absorb(G, trans)
    mm = max_matching_matrix(adj, list(range(L)), list(range(absorber.capacity)))
    if len(mm) != L:
        lonely = [transversals[a] for a in range(L) if a not in mm]
        return None, f"{L - len(mm)} transversals cannot be assigned; " \
                     f"first stranded: {lonely[:3]}"
    cycles = []
    for b, g in enumerate(absorber.absorbers):
        used = [a for a, bb in mm.items() if bb == b]
        if used:
            cycles.extend(g.absorb_cycles(G, transversals[used[0]]))
        else:
            cycles.extend(g.own_cycles())
    return cycles, None


def verify_absorber(G: BlowupGraph, absorber: AbsorberSet, W) -> bool:
    """True iff the absorber produces a validated tiling of its own
    vertex set together with W, by assigning each index-aligned
    transversal of W to a distinct absorber.

    W must be balanced across parts, disjoint from the absorber, and
    at most one transversal per unit of capacity; violating that raises
    PreconditionError.  A failed assignment returns False.
    """
    Wn = _normalize_W(G, W)
    sizes = {p: len(ids) for p, ids in Wn.items()}
    if len(set(sizes.values())) != 1:
        raise PreconditionError(f"W must be balanced across parts, got {sizes}")
    if sizes[1] > absorber.capacity:
        raise PreconditionError(
            f"|W per part| = {sizes[1]} exceeds absorber capacity {absorber.capacity}")
    own = absorber.vertices()
    for p in range(1, G.k + 1):
        overlap = set(own.get(p, [])) & set(Wn[p])
        if overlap:
            raise PreconditionError(
                f"W meets the absorber in part {p}: {sorted(overlap)}")
    cycles, why = _assign_and_assemble(G, absorber, Wn)
    if cycles is None:
        return False
    covered: Dict[int, set] = {p: set() for p in range(1, G.k + 1)}
    for cyc in cycles:
        for p, idx in enumerate(cyc, start=1):
            if idx in covered[p]:
                raise StageFailure("assembly", f"vertex ({p},{idx}) covered twice")
            covered[p].add(idx)
    want = {p: set(absorber.vertices().get(p, [])) | set(Wn[p])
            for p in range(1, G.k + 1)}
    if covered != want:
        raise StageFailure("assembly", "assembled cycles do not cover A union W")
    err = validate_tiling(G, cycles)
    if err is not None:
        raise StageFailure("assembly", f"invalid absorber tiling: {err}")
    return True


# ---------------------------------------------------------------------------
# the factor driver
# ---------------------------------------------------------------------------


@dataclass
class FactorResult:
    cycles: list
    params: dict
    stages: list

    @property
    def size(self) -> int:
        return len(self.cycles)


def _plan_sizes(n: int, k: int, m: int) -> Optional[dict]:
    """Smallest absorber count making the accounting close, then doubled
    while it still closes (more capacity makes the final assignment
    robust): z = k*s absorber vertices per part, T full rounds of mk
    cycles, and a leftover of at most one transversal per gadget."""
    mk = m * k
    feasible = None
    for s in range(1, n + 1):
        z = k * s
        budget = n - z
        if budget < 2 * mk:
            break
        T_plus_1 = budget // mk
        r = budget - T_plus_1 * mk
        leftover = mk + r
        if leftover <= s:
            feasible = {"s": s, "z": z, "T": T_plus_1 - 1, "r": r,
                        "leftover": leftover, "m": m, "mk": mk}
            break
    if feasible is None:
        return None
    s2 = feasible["s"] * 2
    z = k * s2
    budget = n - z
    if budget >= 2 * mk:
        T_plus_1 = budget // mk
        r = budget - T_plus_1 * mk
        leftover = mk + r
        if leftover <= s2:
            return {"s": s2, "z": z, "T": T_plus_1 - 1, "r": r,
                    "leftover": leftover, "m": m, "mk": mk}
    return feasible


def asymp_factor(G: BlowupGraph, eps, rng: np.random.Generator, *,
                 eta: float = 0.05, sigma=None,
                 max_retries: int = 50) -> FactorResult:
    """Transversal cycle factor of a blow-up with every pair minimum
    degree at least (1 + 1/k + eps) n/2, built by the randomized
    pipeline: a gadget absorber, repeated production rounds, and
    absorption of the leftover transversals.

    Raises PreconditionError when the degree bound fails (checked
    exactly) and StageFailure when a stage exhausts its retries.  The
    returned factor is validated before being returned.
    """
    _require_rng(rng)
    k, n = G.k, G.n
    prof = degree_profile(G)
    need = (1 + Fraction(1, k) + Fraction(eps)) * Fraction(n, 2)
    if prof.delta_star < need:
        raise PreconditionError(
            f"delta* = {prof.delta_star} is below (1+1/k+eps)n/2 = {float(need):.2f}")
    if sigma is None:
        sigma = min(float(eps) / 4, 0.05)
    sig = Fraction(sigma)
    m = max(5, int(sig * sig * n / (2 * k)))
    plan = _plan_sizes(n, k, m)
    if plan is None:
        raise StageFailure("sizing", f"no absorber size closes the accounting "
                                     f"for n = {n}, k = {k}, m = {m}")
    mk, s, T, r = plan["mk"], plan["s"], plan["T"], plan["r"]
    stages: list = []

    last_failure = None
    for attempt in range(3):
        try:
            t0 = time.monotonic()
            absorber = build_absorber(G, float(sig), rng, mode="greedy",
                                      count=s, eta=eta, max_retries=max_retries)
            stages.append({"stage": "absorber", "gadgets": s,
                           "millis": (time.monotonic() - t0) * 1000})

            t0 = time.monotonic()
            A = absorber.vertices()
            outside: Dict[int, list] = {}
            reservoir: Dict[int, list] = {}
            chunks: Dict[int, list] = {}
            need_W = (1 + Fraction(1, k) + sig) * mk / 2
            for i in range(1, k + 1):
                free = sorted(set(range(n)) - set(A.get(i, [])))
                if len(free) != n - plan["z"]:
                    raise StageFailure("reservoir", f"part {i} has {len(free)} free "
                                                    f"vertices, expected {n - plan['z']}")
                pick = sorted(int(x) for x in
                              rng.choice(free, size=(T + 1) * mk, replace=False))
                outside[i] = sorted(set(free) - set(pick))
                reservoir[i] = pick
                for sub_attempt in range(max_retries + 1):
                    cand = _balanced_split(G, i, pick, T + 1, mk, rng)
                    if all(not _check_pool_degrees(G, {i: ch}, need_W, "W")
                           for ch in cand):
                        chunks[i] = cand
                        break
                else:
                    raise StageFailure("reservoir",
                                       f"no valid chunk split of part {i} reservoir "
                                       f"after {max_retries} attempts")
            stages.append({"stage": "reservoir", "chunks": T + 1, "chunk_size": mk,
                           "millis": (time.monotonic() - t0) * 1000})

            t0 = time.monotonic()
            cycles: list = []
            U = {i: chunks[i][0] for i in range(1, k + 1)}
            for rnd in range(1, T + 1):
                Wr = {i: chunks[i][rnd] for i in range(1, k + 1)}
                res = round_tiling(G, U, Wr, float(sig), rng,
                                   max_resplits=max_retries)
                cycles.extend(res.cycles)
                U = res.U_prime
            stages.append({"stage": "rounds", "rounds": T, "cycles": T * mk,
                           "millis": (time.monotonic() - t0) * 1000})

            t0 = time.monotonic()
            leftover = {i: sorted(U[i] + outside[i]) for i in range(1, k + 1)}
            if any(len(leftover[i]) != plan["leftover"] for i in leftover):
                raise StageFailure("absorption", "leftover accounting is off")
            absorbed, why = _assign_and_assemble(G, absorber, leftover)
            if absorbed is None:
                raise StageFailure("absorption", why)
            cycles.extend(absorbed)
            stages.append({"stage": "absorption", "transversals": plan["leftover"],
                           "millis": (time.monotonic() - t0) * 1000})

            if len(cycles) != n:
                raise StageFailure("validation", f"{len(cycles)} cycles, expected {n}")
            err = validate_tiling(G, cycles)
            if err is not None:
                raise StageFailure("validation", f"invalid factor: {err}")
            return FactorResult(sorted(cycles), dict(plan, sigma=float(sig),
                                                     eta=eta), stages)
        except StageFailure as exc:
            last_failure = exc
            stages.append({"stage": exc.stage, "failed": str(exc)})
            continue
    raise last_failure
