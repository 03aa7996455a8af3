"""Exploration-graph knowledge model.

Tracks everything both sides can deduce from played matchings and their
outcomes: the labeled exploration graph, per-agent known types, and the set
of viable type assignments.  Two backends coexist:

* explicit: every viable bitmask is materialized (numpy) and filtered on
  each observation.  Authoritative, includes the popcount-k constraint,
  practical up to roughly C(20, 10) labelings.
* rules: no enumeration and no k by default (policies are k-agnostic).
  Deductions come from a fixed-point rule engine over per-edge allowed
  pair-type sets plus a parity union-find.  Sound under-approximation of
  the explicit backend; an opt-in counting rule uses k when provided.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import comb
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .core import (
    Matching, Numeric, Pair, Synergy, TypeVector,
    all_matchings, canonical_matching, check_perfect_matching, optimal_score,
)

UNKNOWN, ZERO, ONE = -1, 0, 1

MAX_EXPLICIT = 400_000


class InconsistentObservation(ValueError):
    """An outcome contradicts an earlier one (or empties the viable set)."""


def _pair(u: int, v: int) -> Pair:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class ExplorationGraph:
    """All teams played so far, each edge labeled with its first outcome."""

    n: int
    edges: Dict[Pair, Tuple[int, Numeric]] = field(default_factory=dict)
    rounds: Tuple[Matching, ...] = ()

    def label(self, u: int, v: int) -> Optional[Numeric]:
        e = self.edges.get(_pair(u, v))
        return None if e is None else e[1]

    def with_round(self, m: Matching, outcomes: Sequence[Numeric]
                   ) -> "ExplorationGraph":
        check_perfect_matching(m, self.n)
        if len(outcomes) != len(m):
            raise ValueError("outcome vector length != matching size")
        edges = dict(self.edges)
        r = len(self.rounds) + 1
        for (u, v), o in zip(m, outcomes):
            p = _pair(u, v)
            if p in edges:
                if edges[p][1] != o:
                    raise InconsistentObservation(
                        f"edge {p} was labeled {edges[p][1]} in round "
                        f"{edges[p][0]}, relabeled {o} in round {r}")
            else:
                edges[p] = (r, o)
        return ExplorationGraph(self.n, edges, self.rounds + (m,))

    def dump(self) -> str:
        """One line per edge: `u v label round`."""
        lines = []
        for (u, v), (r, o) in sorted(self.edges.items()):
            lines.append(f"{u} {v} {o} {r}")
        return "\n".join(lines)


# --------------------------------------------------------------- parity UF

class ParityUnionFind:
    """Union-find where each union carries same/differ parity."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.par = [0] * n  # parity to parent

    def find(self, x: int) -> Tuple[int, int]:
        if self.parent[x] == x:
            return x, 0
        root, p = self.find(self.parent[x])
        self.parent[x] = root
        self.par[x] ^= p
        return root, self.par[x]

    def union(self, x: int, y: int, differ: int) -> bool:
        """Record type(x) xor type(y) == differ.  True if anything merged."""
        rx, px = self.find(x)
        ry, py = self.find(y)
        if rx == ry:
            if px ^ py != differ:
                raise InconsistentObservation(
                    f"parity contradiction between agents {x} and {y}")
            return False
        self.parent[ry] = rx
        self.par[ry] = px ^ py ^ differ
        return True

    def relation(self, x: int, y: int) -> Optional[int]:
        rx, px = self.find(x)
        ry, py = self.find(y)
        return px ^ py if rx == ry else None

    def classes(self, members: Iterable[int]) -> Dict[int, Tuple[List[int], List[int]]]:
        """Root -> ([even-parity members], [odd-parity members])."""
        out: Dict[int, Tuple[List[int], List[int]]] = {}
        for x in sorted(members):
            r, p = self.find(x)
            out.setdefault(r, ([], []))[p].append(x)
        return out


# ------------------------------------------------------------ rule engine

def _allowed_sums(f: Synergy, outcome: Numeric) -> Tuple[int, ...]:
    """Which pair-type sums (0, 1, 2) the synergy maps to this outcome."""
    by_sum = f.values()
    allowed = tuple(s for s in (0, 1, 2) if by_sum[s] == outcome)
    if not allowed:
        raise InconsistentObservation(
            f"outcome {outcome} is not a value of the {f.kind} synergy")
    return allowed


def _rules_fixed_point(n: int, synergy: Synergy,
                       edges: Dict[Pair, Tuple[int, Numeric]],
                       forced: Dict[int, int],
                       k: Optional[int], counting_rule: bool
                       ) -> Tuple[List[int], ParityUnionFind]:
    """Run all deduction rules to a fixed point.

    Every rule concludes only what holds in each viable labeling, so the
    result under-approximates the explicit backend.  Raises on contradiction.
    """
    known = [UNKNOWN] * n
    uf = ParityUnionFind(n)

    def set_known(x: int, t: int) -> bool:
        if known[x] == UNKNOWN:
            known[x] = t
            return True
        if known[x] != t:
            raise InconsistentObservation(f"agent {x} deduced both 0 and 1")
        return False

    for x, t in forced.items():
        set_known(x, t)

    cons = [(p, _allowed_sums(synergy, o)) for p, (_, o) in sorted(edges.items())]

    changed = True
    while changed:
        changed = False
        for (u, v), allowed in cons:
            if allowed == (0,):
                changed |= set_known(u, 0)
                changed |= set_known(v, 0)
            elif allowed == (2,):
                changed |= set_known(u, 1)
                changed |= set_known(v, 1)
            elif allowed == (1,):
                changed |= uf.union(u, v, 1)
            elif allowed == (0, 2):
                changed |= uf.union(u, v, 0)
            elif allowed == (1, 2):
                # at least one endpoint is a 1
                if known[u] == 0:
                    changed |= set_known(v, 1)
                if known[v] == 0:
                    changed |= set_known(u, 1)
                if uf.relation(u, v) == 0:
                    changed |= set_known(u, 1)
                    changed |= set_known(v, 1)
            elif allowed == (0, 1):
                # at least one endpoint is a 0
                if known[u] == 1:
                    changed |= set_known(v, 0)
                if known[v] == 1:
                    changed |= set_known(u, 0)
                if uf.relation(u, v) == 0:
                    changed |= set_known(u, 0)
                    changed |= set_known(v, 0)
            # (0, 1, 2): the outcome constrains nothing

        # knowledge flows along parity classes
        for root, (evens, odds) in uf.classes(range(n)).items():
            seed = next((x for x in evens + odds if known[x] != UNKNOWN), None)
            if seed is None:
                continue
            _, ps = uf.find(seed)
            t = known[seed]
            for x in evens:
                changed |= set_known(x, t if ps == 0 else 1 - t)
            for x in odds:
                changed |= set_known(x, t if ps == 1 else 1 - t)

        if counting_rule and k is not None:
            changed |= _apply_counting_rule(n, k, known, uf, set_known)

    return known, uf


def _apply_counting_rule(n, k, known, uf, set_known) -> bool:
    """Resolve agents the global count of ones forces."""
    changed = False
    ones = known.count(ONE)
    zeros = known.count(ZERO)
    if ones > k or zeros > n - k:
        raise InconsistentObservation("counting rule contradiction")
    unknown_set = [x for x in range(n) if known[x] == UNKNOWN]
    if not unknown_set:
        return False
    if ones == k:
        for x in unknown_set:
            changed |= set_known(x, 0)
        return changed
    if zeros == n - k:
        for x in unknown_set:
            changed |= set_known(x, 1)
        return changed
    # parity components: orientation subset-sum over unknown classes
    comps = [(evens, odds)
             for root, (evens, odds) in uf.classes(unknown_set).items()]
    need = k - ones
    sums = {0}
    for evens, odds in comps:
        sums = {s + c for s in sums for c in {len(evens), len(odds)}}
    if need not in sums:
        raise InconsistentObservation("no component orientation matches k")
    for i, (evens, odds) in enumerate(comps):
        others = {0}
        for j, (e2, o2) in enumerate(comps):
            if j != i:
                others = {s + c for s in others for c in {len(e2), len(o2)}}
        can_e = any(s + len(evens) == need for s in others)
        can_o = any(s + len(odds) == need for s in others)
        if can_e and not can_o:
            for x in evens:
                changed |= set_known(x, 1)
            for x in odds:
                changed |= set_known(x, 0)
        elif can_o and not can_e:
            for x in odds:
                changed |= set_known(x, 1)
            for x in evens:
                changed |= set_known(x, 0)
    return changed


# ------------------------------------------------------- explicit backend

def _enumerate_viable(n: int, k: int) -> np.ndarray:
    if comb(n, k) > MAX_EXPLICIT:
        raise ValueError(
            f"C({n},{k}) exceeds the explicit-backend cap {MAX_EXPLICIT}")
    masks = np.fromiter(
        (sum(1 << i for i in c) for c in itertools.combinations(range(n), k)),
        dtype=np.uint64, count=comb(n, k))
    return masks


def _filter_viable(viable: np.ndarray, f: Synergy, u: int, v: int,
                   outcome: Numeric) -> np.ndarray:
    a = (viable >> np.uint64(u)) & np.uint64(1)
    b = (viable >> np.uint64(v)) & np.uint64(1)
    s = a + b
    allowed = _allowed_sums(f, outcome)
    mask = np.isin(s, np.array(allowed, dtype=np.uint64))
    return viable[mask]


def _known_from_viable(n: int, viable: np.ndarray) -> List[int]:
    full = np.uint64((1 << n) - 1)
    always1 = np.bitwise_and.reduce(viable) if len(viable) else np.uint64(0)
    always0 = np.bitwise_and.reduce(viable ^ full) if len(viable) else np.uint64(0)
    out = []
    for i in range(n):
        bit = np.uint64(1 << i)
        if always1 & bit:
            out.append(ONE)
        elif always0 & bit:
            out.append(ZERO)
        else:
            out.append(UNKNOWN)
    return out


# ---------------------------------------------------------- KnowledgeState

@dataclass(frozen=True)
class KnowledgeState:
    """Everything deducible from the play so far."""

    graph: ExplorationGraph
    synergy: Synergy
    k: Optional[int] = None
    counting_rule: bool = False
    viable: Optional[np.ndarray] = None
    known: Tuple[int, ...] = ()

    @staticmethod
    def fresh(n: int, synergy: Synergy, k: Optional[int] = None,
              explicit: bool = False, counting_rule: bool = False
              ) -> "KnowledgeState":
        if explicit:
            if k is None:
                raise ValueError("explicit backend needs k")
            viable = _enumerate_viable(n, k)
            return KnowledgeState(ExplorationGraph(n), synergy, k, True,
                                  viable, tuple(_known_from_viable(n, viable)))
        return KnowledgeState(ExplorationGraph(n), synergy, k, counting_rule,
                              None, tuple([UNKNOWN] * n))

    @property
    def n(self) -> int:
        return self.graph.n

    def is_explicit(self) -> bool:
        return self.viable is not None

    def known_zeros(self) -> List[int]:
        return [i for i, t in enumerate(self.known) if t == ZERO]

    def known_ones(self) -> List[int]:
        return [i for i, t in enumerate(self.known) if t == ONE]

    def unknowns(self) -> List[int]:
        return [i for i, t in enumerate(self.known) if t == UNKNOWN]

    def policy_view(self) -> "KnowledgeState":
        """The k-blind facade handed to policies."""
        if not self.is_explicit() and self.k is None and not self.counting_rule:
            return self
        return replace(self, k=None, counting_rule=False, viable=None,
                       known=tuple(_rules_fixed_point(
                           self.n, self.synergy, self.graph.edges, {},
                           None, False)[0]))

    def parity(self) -> ParityUnionFind:
        _, uf = _rules_fixed_point(self.n, self.synergy, self.graph.edges,
                                   {}, self.k, self.counting_rule)
        return uf


def observe(state: KnowledgeState, m: Matching,
            outcomes: Sequence[Numeric]) -> KnowledgeState:
    """Fold one round's outcomes into the knowledge state."""
    graph = state.graph.with_round(m, outcomes)
    if state.is_explicit():
        viable = state.viable
        for (u, v), o in zip(m, outcomes):
            viable = _filter_viable(viable, state.synergy, u, v, o)
        if len(viable) == 0:
            raise InconsistentObservation("viable set emptied; bad adversary")
        known = tuple(_known_from_viable(state.n, viable))
        return replace(state, graph=graph, viable=viable, known=known)
    known, _ = _rules_fixed_point(state.n, state.synergy, graph.edges, {},
                                  state.k, state.counting_rule)
    return replace(state, graph=graph, known=tuple(known))


def deduce_rules(state: KnowledgeState) -> KnowledgeState:
    """Re-run the rule engine (useful after constructing states by hand)."""
    if state.is_explicit():
        return replace(state, known=tuple(_known_from_viable(state.n,
                                                             state.viable)))
    known, _ = _rules_fixed_point(state.n, state.synergy, state.graph.edges,
                                  {}, state.k, state.counting_rule)
    return replace(state, known=tuple(known))


# ------------------------------------------------------ unresolved subgraph

@dataclass(frozen=True)
class UnresolvedSubgraph:
    """Induced labeled subgraph on the unknown agents."""

    vertices: Tuple[int, ...]
    edges: Dict[Pair, Numeric]


def unresolved_subgraph(state: KnowledgeState) -> UnresolvedSubgraph:
    unk = set(state.unknowns())
    edges = {p: o for p, (_, o) in state.graph.edges.items()
             if p[0] in unk and p[1] in unk}
    return UnresolvedSubgraph(tuple(sorted(unk)), edges)


# -------------------------------------------------------- independent sets

def independent_set_exists(vertices: Sequence[int],
                           edges: Iterable[Pair],
                           size: int) -> Tuple[bool, Optional[List[int]]]:
    """Exact branch-and-bound decision, with a witness when one exists."""
    if size <= 0:
        return True, []
    verts = list(vertices)
    idx = {v: i for i, v in enumerate(verts)}
    nv = len(verts)
    adj = [0] * nv
    for u, v in edges:
        if u in idx and v in idx:
            adj[idx[u]] |= 1 << idx[v]
            adj[idx[v]] |= 1 << idx[u]

    def rec(avail: int, need: int) -> Optional[int]:
        if need == 0:
            return 0
        cnt = avail.bit_count()
        if cnt < need:
            return None
        live = avail
        isolated = 0
        vmax, dmax = -1, -1
        while live:
            b = live & -live
            live ^= b
            i = b.bit_length() - 1
            d = (adj[i] & avail).bit_count()
            if d == 0:
                isolated |= b
            elif d > dmax:
                vmax, dmax = i, d
        if isolated:
            ni = isolated.bit_count()
            if ni >= need:
                return _take(isolated, need)
            sub = rec(avail & ~isolated, need - ni)
            return None if sub is None else sub | isolated
        # branch on the max-degree vertex: exclude it, or take it
        b = 1 << vmax
        sub = rec(avail & ~b, need)
        if sub is not None:
            return sub
        sub = rec(avail & ~b & ~adj[vmax], need - 1)
        return None if sub is None else sub | b

    def _take(mask: int, want: int) -> int:
        out = 0
        while want and mask:
            b = mask & -mask
            mask ^= b
            out |= b
            want -= 1
        return out

    got = rec((1 << nv) - 1, size)
    if got is None:
        return False, None
    return True, sorted(verts[i] for i in range(nv) if got >> i & 1)


def max_independent_set(vertices: Sequence[int],
                        edges: Iterable[Pair]) -> List[int]:
    lo, hi = 0, len(vertices)
    best: List[int] = []
    while lo < hi:
        mid = (lo + hi + 1) // 2
        ok, wit = independent_set_exists(vertices, edges, mid)
        if ok:
            best = wit
            lo = mid
        else:
            hi = mid - 1
    return best


# ----------------------------------------------------------- viable_exists

def viable_exists(state: KnowledgeState,
                  partial: Sequence[Tuple[int, int]] = ()) -> bool:
    """Is some popcount-k labeling consistent with the graph and `partial`?"""
    if state.is_explicit():
        viable = state.viable
        for agent, t in partial:
            bit = (viable >> np.uint64(agent)) & np.uint64(1)
            viable = viable[bit == t]
            if len(viable) == 0:
                return False
        return len(viable) > 0
    if state.k is None:
        raise ValueError("viable_exists without explicit backend needs k")
    return _viable_exists_rules(state, dict(partial))


def _viable_exists_rules(state: KnowledgeState, forced: Dict[int, int]) -> bool:
    n, k, f = state.n, state.k, state.synergy
    try:
        known, uf = _rules_fixed_point(n, f, state.graph.edges, forced, k, True)
    except InconsistentObservation:
        return False
    ones = known.count(ONE)
    zeros = known.count(ZERO)
    if ones > k or zeros > n - k:
        return False
    unk = [x for x in range(n) if known[x] == UNKNOWN]
    if not unk:
        return ones == k
    by_sum = f.values()
    distinct = len(set(by_sum))
    if distinct == 1:
        return True  # constant synergy constrains nothing
    if distinct == 3 or by_sum[0] == by_sum[2]:
        # every edge is a parity (or fixing) constraint: orientation sums
        comps = uf.classes(unk).values()
        sums = {0}
        for evens, odds in comps:
            sums = {s + c for s in sums for c in {len(evens), len(odds)}}
        return (k - ones) in sums
    # two-valued, endpoints differ: OR-like or AND-like after reduction.
    # In both cases feasibility is an independent-set bound on the unresolved
    # subgraph: ones avoid failing edges (AND-like) or zeros avoid succeeding
    # edges (OR-like); any smaller set also works, so only the max IS matters.
    and_like = by_sum[0] == by_sum[1]
    sub = {p: o for p, (_, o) in state.graph.edges.items()
           if p[0] in set(unk) and p[1] in set(unk)}
    if and_like:
        block = [p for p, o in sub.items() if _allowed_sums(f, o) == (0, 1)]
        need = k - ones
    else:
        block = [p for p, o in sub.items() if _allowed_sums(f, o) == (1, 2)]
        need = (n - k) - zeros
    if need < 0 or need > len(unk):
        return False
    ok, _ = independent_set_exists(unk, block, need)
    return ok


# --------------------------------------------------------- canonical form

def canonical_form(n: int, edges: Dict[Pair, object]) -> bytes:
    """Isomorphism-invariant key for a small edge-colored graph.

    Individualization-refinement with twin pruning; exact for n <= 16 (two
    graphs share a key iff isomorphic).  Colors may be any values with a
    deterministic repr.
    """
    if n > 16:
        raise ValueError("canonical_form supports at most 16 vertices")
    colors = sorted({repr(c) for c in edges.values()})
    cidx = {c: i for i, c in enumerate(colors)}
    nc = len(colors)
    adj = [[0] * n for _ in range(nc)]
    for (u, v), c in edges.items():
        i = cidx[repr(c)]
        adj[i][u] |= 1 << v
        adj[i][v] |= 1 << u

    def refine(parts: List[int]) -> List[int]:
        while True:
            sig_cache = {}
            new_parts: List[int] = []
            split = False
            for part in parts:
                if part.bit_count() == 1:
                    new_parts.append(part)
                    continue
                groups: Dict[tuple, int] = {}
                m = part
                while m:
                    b = m & -m
                    m ^= b
                    v = b.bit_length() - 1
                    key = sig_cache.get(v)
                    if key is None:
                        key = tuple((adj[c][v] & p).bit_count()
                                    for c in range(nc) for p in parts)
                        sig_cache[v] = key
                    groups.setdefault(key, 0)
                    groups[key] |= b
                if len(groups) == 1:
                    new_parts.append(part)
                else:
                    split = True
                    new_parts.extend(g for _, g in sorted(groups.items()))
            parts = new_parts
            if not split:
                return parts

    best: List[Optional[bytes]] = [None]

    def leaf_key(parts: List[int]) -> bytes:
        pos = {}
        for i, part in enumerate(parts):
            pos[part.bit_length() - 1] = i
        rows = []
        for c in range(nc):
            es = []
            for (u, v), col in edges.items():
                if cidx[repr(col)] == c:
                    a, b = pos[u], pos[v]
                    es.append((a, b) if a < b else (b, a))
            rows.append(tuple(sorted(es)))
        return repr((n, colors, rows)).encode()

    def search(parts: List[int]) -> None:
        parts = refine(parts)
        target_i = next((i for i, p in enumerate(parts)
                         if p.bit_count() > 1), None)
        if target_i is None:
            key = leaf_key(parts)
            if best[0] is None or key < best[0]:
                best[0] = key
            return
        target = parts[target_i]
        # twin pruning: branching on either of two vertices whose colored
        # neighborhoods agree outside the pair gives isomorphic partitions
        reps: List[int] = []
        seen_sigs: List[Tuple[int, List[int]]] = []
        m = target
        while m:
            b = m & -m
            m ^= b
            v = b.bit_length() - 1
            is_twin = False
            for u, usig in seen_sigs:
                pairmask = ~((1 << u) | (1 << v))
                if all(adj[c][v] & pairmask == usig[c] & pairmask
                       for c in range(nc)):
                    is_twin = True
                    break
            if not is_twin:
                seen_sigs.append((v, [adj[c][v] for c in range(nc)]))
                reps.append(v)
        for v in reps:
            b = 1 << v
            branched = (parts[:target_i] + [b, target & ~b]
                        + parts[target_i + 1:])
            search(branched)

    search([(1 << n) - 1])
    return best[0]


def exploration_canonical_key(g: ExplorationGraph) -> bytes:
    return canonical_form(g.n, {p: o for p, (_, o) in g.edges.items()})


# ------------------------------------------------- optimal matching / lock

def greedy_optimal_matching(t: TypeVector, f: Synergy) -> Matching:
    """An optimal matching for a fully known type vector."""
    n, k = t.n, t.ones
    ones = [i for i in range(n) if t.type_of(i) == 1]
    zeros = [i for i in range(n) if t.type_of(i) == 0]
    kind = f.kind
    if kind == "EQ":
        oo = k // 2
    elif kind in ("XOR", "OR"):
        oo = max(0, k - n // 2)
    elif kind == "AND":
        oo = k // 2
    else:
        v00, v01, v11 = f.values()
        lo_oo, hi_oo = max(0, k - n // 2), k // 2
        oo = hi_oo if (v00 + v11 - 2 * v01) >= 0 else lo_oo
        best = None
        for cand in (lo_oo, hi_oo):
            zo_ = k - 2 * cand
            zz_ = n // 2 - zo_ - cand
            val = v00 * zz_ + v01 * zo_ + v11 * cand
            if best is None or val > best:
                best, oo = val, cand
    zo = k - 2 * oo
    pairs = []
    oi = zi = 0
    for _ in range(oo):
        pairs.append((ones[oi], ones[oi + 1]))
        oi += 2
    for _ in range(zo):
        pairs.append((ones[oi], zeros[zi]))
        oi += 1
        zi += 1
    while zi < len(zeros):
        pairs.append((zeros[zi], zeros[zi + 1]))
        zi += 2
    return canonical_matching(pairs)


def _matching_scores_explicit(m: Matching, viable: np.ndarray,
                              f: Synergy) -> np.ndarray:
    by_sum = f.values()
    vals = np.array([float(x) for x in by_sum])
    total = np.zeros(len(viable))
    for u, v in m:
        a = (viable >> np.uint64(u)) & np.uint64(1)
        b = (viable >> np.uint64(v)) & np.uint64(1)
        total += vals[(a + b).astype(np.int64)]
    return total


def matching_is_universal(state: KnowledgeState, m: Matching) -> bool:
    """Does m score optimal_score under every viable labeling? (explicit)"""
    if not state.is_explicit():
        raise ValueError("universal check needs the explicit backend")
    n, k, f = state.n, state.k, state.synergy
    opt = float(optimal_score(n, k, f))
    scores = _matching_scores_explicit(m, state.viable, f)
    return bool(np.all(np.isclose(scores, opt)))


def _rule_lock_matching(state: KnowledgeState) -> Optional[Matching]:
    """Constructive lock rules for the rule backend.

    Covers the endgames the named policies reach: all agents known, or a
    parity-component structure whose within-component pairing is optimal
    under every orientation (EQ and XOR style synergies).
    """
    n, f = state.n, state.synergy
    unk = state.unknowns()
    if not unk:
        t = TypeVector.from_types([1 if x == ONE else 0 for x in state.known])
        return greedy_optimal_matching(t, f)
    by_sum = f.values()
    parity_kind = by_sum[0] == by_sum[2] != by_sum[1]
    if not parity_kind or len(unk) != n:
        return None
    uf = state.parity()
    comps = sorted(uf.classes(range(n)).values(),
                   key=lambda eo: (eo[0] + eo[1]))
    if any((len(e) + len(o)) % 2 for e, o in comps):
        return None  # odd components force cross-component pairs
    eq_like = by_sum[0] > by_sum[1]  # same-type pairs succeed
    pairs: List[Pair] = []
    if eq_like:
        odd_comps = [c for c in comps if len(c[0]) % 2 == 1]
        if len(odd_comps) > 1:
            return None
        leftovers: List[int] = []
        for evens, odds in comps:
            for cls in (evens, odds):
                lst = list(cls)
                if len(lst) % 2:
                    leftovers.append(lst.pop())
                pairs.extend(zip(lst[::2], lst[1::2]))
        if leftovers:
            assert len(leftovers) == 2
            pairs.append((leftovers[0], leftovers[1]))
        return canonical_matching(pairs)
    # xor-like: every unbalanced component beyond the first breaks the lock
    if sum(1 for evens, odds in comps if len(evens) != len(odds)) > 1:
        return None
    for evens, odds in comps:
        a, b = list(evens), list(odds)
        cross = min(len(a), len(b))
        for i in range(cross):
            pairs.append((a[i], b[i]))
        rest = a[cross:] + b[cross:]
        pairs.extend(zip(rest[::2], rest[1::2]))
    return canonical_matching(pairs)


def optimal_matching_known(state: KnowledgeState,
                           extra_candidates: Iterable[Matching] = ()
                           ) -> Optional[Matching]:
    """A matching that is optimal under EVERY viable labeling, if one is
    known.

    Explicit backend: authoritative.  All matchings are checked for n <= 10;
    beyond that, candidates are built greedily from up to 200 sampled viable
    labelings (plus any caller-supplied ones) and each is verified against
    the full viable set, so a returned matching is always sound but None may
    be conservative.
    """
    if state.is_explicit():
        f = state.synergy
        if state.n <= 10:
            for m in all_matchings(state.n):
                if matching_is_universal(state, m):
                    return m
            return None
        cands: List[Matching] = list(extra_candidates)
        stride = max(1, len(state.viable) // 200)
        for bits in state.viable[::stride]:
            t = TypeVector(state.n, int(bits))
            cands.append(greedy_optimal_matching(t, f))
        seen = set()
        for m in cands:
            if m in seen:
                continue
            seen.add(m)
            if matching_is_universal(state, m):
                return m
        return None
    return _rule_lock_matching(state)


def determined_score(state: KnowledgeState, m: Matching) -> Optional[Numeric]:
    """The score of m if it is the same under every viable labeling, else
    None.  Rule-based: usable at any n."""
    f = state.synergy
    by_sum = f.values()
    uf = state.parity()
    total = Fraction(0)
    for u, v in m:
        lab = state.graph.label(u, v)
        if lab is not None:
            total += Fraction(lab)
            continue
        ku, kv = state.known[u], state.known[v]
        if ku != UNKNOWN and kv != UNKNOWN:
            total += Fraction(f.apply(ku, kv))
            continue
        if ku == ONE and by_sum[1] == by_sum[2]:
            total += Fraction(by_sum[1])  # OR-like: a known 1 decides
            continue
        if kv == ONE and by_sum[1] == by_sum[2]:
            total += Fraction(by_sum[1])
            continue
        if ku == ZERO and by_sum[0] == by_sum[1]:
            total += Fraction(by_sum[0])  # AND-like: a known 0 decides
            continue
        if kv == ZERO and by_sum[0] == by_sum[1]:
            total += Fraction(by_sum[0])
            continue
        rel = uf.relation(u, v)
        if rel == 0 and by_sum[0] == by_sum[2]:
            total += Fraction(by_sum[0])
            continue
        if rel == 1:
            total += Fraction(by_sum[1])
            continue
        return None
    return total
