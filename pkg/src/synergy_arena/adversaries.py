"""Worst-case opponents: deterministic rules for answering each matching.

Every opponent owns one side of one game.  Construct it with the hidden
count k of One-agents, then call respond(state, matching) once per round;
the returned outcome vector is aligned with the matching as given.  All
answers are consistent: a replayed team keeps its recorded outcome, and
after every call at least one labeling with exactly k Ones agrees with the
full history.  When a scripted step cannot be met against the actual play,
the opponent takes the nearest feasible answer and logs the shortfall in
its diagnostics dict instead of breaking consistency.

Opponents are stateful and single-game: build a fresh one per game (see
make_adversary).  The *_step functions at the bottom are the stateless
one-shot forms.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from .core import (AND, EQ, OR, XOR, Matching, Numeric, Pair, Synergy,
                   canonical_matching, check_perfect_matching)
from .exact_lab import MatchingGame
from .exploration import (InconsistentObservation, KnowledgeState,
                          _known_from_viable, _rules_fixed_point,
                          independent_set_exists, observe, viable_exists)

OutcomeVector = Tuple[Numeric, ...]


def _norm(x: Numeric) -> Numeric:
    """Integral outcomes as int, the rest as Fraction (stable repr)."""
    fx = Fraction(x)
    return int(fx) if fx.denominator == 1 else fx


def _alternating_components(n: int, m1: Matching,
                            m2: Matching) -> List[List[int]]:
    """Cycle decomposition of the union of two perfect matchings.

    Each component lists its vertices in traversal order starting at the
    component's smallest vertex, oriented so that the edge from cyc[i] to
    cyc[i+1] lies in m1 exactly when i is even.  A doubled edge comes out
    as a 2-cycle.
    """
    p1: Dict[int, int] = {}
    p2: Dict[int, int] = {}
    for u, v in m1:
        p1[u], p1[v] = v, u
    for u, v in m2:
        p2[u], p2[v] = v, u
    comps: List[List[int]] = []
    seen: Set[int] = set()
    for v0 in range(n):
        if v0 in seen:
            continue
        cyc = [v0]
        seen.add(v0)
        cur, use2 = p1[v0], True
        while cur != v0:
            cyc.append(cur)
            seen.add(cur)
            cur = (p2 if use2 else p1)[cur]
            use2 = not use2
        comps.append(cyc)
    return comps


def _greedy_independent(vertices: Iterable[int],
                        edges: Iterable[Pair]) -> List[int]:
    """Independent set by repeated removal of a max-degree vertex (smallest
    index on ties).  At least half the vertices survive on unions of two
    matchings, whose components are paths and even cycles."""
    alive = set(vertices)
    adj: Dict[int, Set[int]] = {v: set() for v in alive}
    for u, v in edges:
        if u in alive and v in alive and u != v:
            adj[u].add(v)
            adj[v].add(u)
    while True:
        busiest, worst = None, 0
        for v in sorted(alive):
            d = len(adj[v] & alive)
            if d > worst:
                busiest, worst = v, d
        if busiest is None:
            return sorted(alive)
        alive.discard(busiest)


def _majority_side(vertices: Iterable[int],
                   edges: Iterable[Pair]) -> List[int]:
    """Per component of a bipartite graph, the larger color class (the one
    holding the smallest vertex on ties)."""
    verts = sorted(set(vertices))
    adj: Dict[int, Set[int]] = {v: set() for v in verts}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    seen: Set[int] = set()
    chosen: List[int] = []
    for v0 in verts:
        if v0 in seen:
            continue
        color = {v0: 0}
        stack = [v0]
        seen.add(v0)
        while stack:
            x = stack.pop()
            for w in adj[x]:
                if w not in color:
                    color[w] = 1 - color[x]
                    seen.add(w)
                    stack.append(w)
        side0 = [x for x in color if color[x] == 0]
        side1 = [x for x in color if color[x] == 1]
        chosen += side0 if len(side0) >= len(side1) else side1
    return sorted(chosen)


class Adversary:
    """Base opponent: holds k and a diagnostics dict, answers matchings."""

    kind = "adversary"

    def __init__(self, k: int):
        if k < 0:
            raise ValueError("k must be nonnegative")
        self.k = k
        self.diagnostics: Dict[str, object] = {}

    def respond(self, state: KnowledgeState, m: Matching) -> OutcomeVector:
        raise NotImplementedError

    def _guard(self, state: KnowledgeState, m: Matching,
               wants: Optional[Synergy]) -> None:
        check_perfect_matching(m, state.n)
        if self.k > state.n:
            raise ValueError("k exceeds the number of agents")
        if wants is not None and state.synergy.values() != wants.values():
            raise ValueError(
                f"{type(self).__name__} answers {wants.kind} games only")


# ------------------------------------------------------------ EQ and XOR

class EqBipartite(Adversary):
    """Two-round opponent for the same-type synergy.

    Round 1 fails the lex-first min(k, n-k) teams.  Round 2 walks the
    cycles of the union of both matchings and commits the minority type to
    the even-position endpoint of every failed first-round team; those
    agents are pairwise unteamed in round 2 as well, so the same number of
    teams fails again.  Truthful from then on.
    """

    kind = "eq-bipartite"

    def __init__(self, k: int):
        super().__init__(k)
        self._types: Optional[List[int]] = None
        self._m1: Optional[Matching] = None
        self._fail1: Matching = ()
        self._seen = 0

    def respond(self, state: KnowledgeState, m: Matching) -> OutcomeVector:
        self._guard(state, m, EQ)
        n, k, f = state.n, self.k, state.synergy
        for mi in state.graph.rounds[self._seen:]:
            rec = tuple(_norm(state.graph.label(u, v)) for u, v in mi)
            if self._answer(n, k, f, mi) != rec:
                raise ValueError("the recorded history was not produced by "
                                 "this opponent")
            self._seen += 1
        self._seen += 1
        return self._answer(n, k, f, m)

    def _answer(self, n: int, k: int, f: Synergy,
                m: Matching) -> OutcomeVector:
        if self._types is not None:
            t = self._types
            return tuple(_norm(f.apply(t[u], t[v])) for u, v in m)
        if self._m1 is None:
            j = min(k, n - k)
            if j == 0:
                self._types = [1 if k else 0] * n
                return tuple(_norm(1) for _ in m)
            mc = canonical_matching(m)
            self._m1, self._fail1 = mc, mc[:j]
            failed = set(self._fail1)
            return tuple(_norm(0 if tuple(sorted(p)) in failed else 1)
                         for p in m)
        mc = canonical_matching(m)
        pos: Dict[int, int] = {}
        for cyc in _alternating_components(n, self._m1, mc):
            for i, v in enumerate(cyc):
                pos[v] = i
        # each failed round-1 edge spans an even and an odd position;
        # the even-position ends form an independent set in both rounds
        minority = {a if pos[a] % 2 == 0 else b for a, b in self._fail1}
        mt = 1 if k <= n - k else 0
        types = [mt if v in minority else 1 - mt for v in range(n)]
        if sum(types) != k:
            raise AssertionError("type commitment lost the count")
        self._types = types
        return tuple(_norm(f.apply(types[u], types[v])) for u, v in m)


class XorCycle(Adversary):
    """Two-round opponent for the opposite-type synergy.

    Round 1 allows exactly k mod 2 successes.  Round 2 fills the cycles of
    the union of both matchings with contiguous runs of Zeros, leaving at
    most 2 + (k mod 2) mixed teams, all of them on fresh edges.  Truthful
    from then on.
    """

    kind = "xor-cycle"

    def __init__(self, k: int):
        super().__init__(k)
        self._types: Optional[List[int]] = None
        self._m1: Optional[Matching] = None
        self._succ: Optional[Pair] = None
        self._seen = 0

    def respond(self, state: KnowledgeState, m: Matching) -> OutcomeVector:
        self._guard(state, m, XOR)
        n, k, f = state.n, self.k, state.synergy
        for mi in state.graph.rounds[self._seen:]:
            rec = tuple(_norm(state.graph.label(u, v)) for u, v in mi)
            if self._answer(n, k, f, mi) != rec:
                raise ValueError("the recorded history was not produced by "
                                 "this opponent")
            self._seen += 1
        self._seen += 1
        return self._answer(n, k, f, m)

    def _answer(self, n: int, k: int, f: Synergy,
                m: Matching) -> OutcomeVector:
        if self._types is not None:
            t = self._types
            return tuple(_norm(f.apply(t[u], t[v])) for u, v in m)
        if self._m1 is None:
            mc = canonical_matching(m)
            self._m1 = mc
            self._succ = mc[0] if k % 2 else None
            good = {self._succ} if self._succ else set()
            return tuple(_norm(1 if tuple(sorted(p)) in good else 0)
                         for p in m)
        self._types = self._commit(n, k, canonical_matching(m))
        t = self._types
        return tuple(_norm(f.apply(t[u], t[v])) for u, v in m)

    def _commit(self, n: int, k: int, m2: Matching) -> List[int]:
        comps = _alternating_components(n, self._m1, m2)
        types: List[Optional[int]] = [None] * n
        zeros_left, ones_left = n - k, k
        if self._succ is not None:
            u_star = self._succ[0]
            special = next(c for c in comps if u_star in c)
            comps = [c for c in comps if c is not special]
            L = len(special)
            if L == 2:
                types[special[0]], types[special[1]] = 1, 0
                ones_left -= 1
                zeros_left -= 1
            else:
                idx = next(i for i in range(0, L, 2)
                           if {special[i], special[(i + 1) % L]}
                           == set(self._succ))
                rot = special[idx:] + special[:idx]
                # odd run of Ones ending at the success edge; both ends of
                # the Zero arc then sit on fresh odd-index edges
                a1 = max(1, L - zeros_left)
                assert a1 % 2 == 1 and a1 <= min(ones_left, L - 1)
                for v in rot[1:L - a1 + 1]:
                    types[v] = 0
                for v in [rot[0]] + rot[L - a1 + 1:]:
                    types[v] = 1
                ones_left -= a1
                zeros_left -= L - a1
        for cyc in comps:
            L = len(cyc)
            if zeros_left >= L:
                for v in cyc:
                    types[v] = 0
                zeros_left -= L
            elif zeros_left == 0:
                for v in cyc:
                    types[v] = 1
                ones_left -= L
            else:
                r0 = zeros_left
                assert r0 % 2 == 0
                for v in cyc[:r0]:
                    types[v] = 0
                for v in cyc[r0:]:
                    types[v] = 1
                ones_left -= L - r0
                zeros_left = 0
        assert zeros_left == 0 and ones_left == 0
        assert all(t is not None for t in types)
        return types  # type: ignore[return-value]


# --------------------------------------------------------------- OR scripts

_OR_SCRIPTS = ("LB1", "LB2", "LB3", "LB4")


class OrScripted(Adversary):
    """Scripted opponent family for the either-type synergy.

    Four scripts cover the four regimes of alpha = (n-k)/n; BEST picks the
    one whose guaranteed bound is largest at the instance's alpha.  Each
    script prescribes how many fresh teams to fail in round 1 and which
    explored agents to reveal as Zero later; everything beyond the script
    falls back to fail-whenever-feasible.

    Commitments are a partial labeling plus pending either-one constraints
    from succeeded teams whose members are both still open.  Feasibility of
    an answer is exact: after unit propagation, committed Ones plus a
    minimum vertex cover of the pending pairs must fit inside k, and
    committed Zeros inside n - k.  Infeasible quota steps degrade to the
    feasible alternative and are logged under diagnostics["shortfalls"].
    """

    kind = "or-scripted"

    def __init__(self, k: int, script: str = "BEST"):
        super().__init__(k)
        script = script.upper()
        if script not in _OR_SCRIPTS + ("BEST",):
            raise ValueError(f"unknown script {script!r}")
        self.script = script
        self._script: Optional[str] = None if script == "BEST" else script
        self._types: Dict[int, int] = {}
        self._pending: Set[FrozenSet[int]] = set()
        self._r1_pending: List[Pair] = []
        self._need_r4 = False
        self.diagnostics = {"script": self._script, "alpha": None,
                            "beta": None, "gamma": None, "is_sizes": {},
                            "shortfalls": [], "r2_zero_reveals": 0}

    # ---- exact feasibility of the commitment store

    @staticmethod
    def _propagate(types: Dict[int, int], pending: Set[FrozenSet[int]]
                   ) -> Optional[Tuple[Dict[int, int], Set[FrozenSet[int]]]]:
        types = dict(types)
        pend = set(pending)
        changed = True
        while changed:
            changed = False
            for e in list(pend):
                u, v = tuple(e)
                tu, tv = types.get(u), types.get(v)
                if tu == 1 or tv == 1:
                    pend.discard(e)
                elif tu == 0 and tv == 0:
                    return None
                elif tu == 0:
                    types[v] = 1
                    pend.discard(e)
                    changed = True
                elif tv == 0:
                    types[u] = 1
                    pend.discard(e)
                    changed = True
        return types, pend

    @staticmethod
    def _min_cover(edges: FrozenSet[FrozenSet[int]]) -> int:
        if not edges:
            return 0
        deg: Dict[int, int] = {}
        for e in edges:
            for x in e:
                deg[x] = deg.get(x, 0) + 1
        leaf = next((x for x in sorted(deg) if deg[x] == 1), None)
        if leaf is not None:
            w = next(x for e in edges if leaf in e for x in e if x != leaf)
            return 1 + OrScripted._min_cover(
                frozenset(e for e in edges if w not in e))
        v = max(sorted(deg), key=lambda x: deg[x])
        take_v = 1 + OrScripted._min_cover(
            frozenset(e for e in edges if v not in e))
        nbrs = {x for e in edges if v in e for x in e if x != v}
        take_n = len(nbrs) + OrScripted._min_cover(
            frozenset(e for e in edges if not (e & nbrs)))
        return min(take_v, take_n)

    def _attempt(self, n: int, updates: Optional[Dict[int, int]] = None,
                 new_pending: Iterable[Pair] = ()) -> bool:
        """Apply updates if the store stays satisfiable by some k-labeling."""
        types = dict(self._types)
        for a, t in (updates or {}).items():
            if types.get(a, t) != t:
                return False
            types[a] = t
        pend = set(self._pending) | {frozenset(p) for p in new_pending}
        closed = self._propagate(types, pend)
        if closed is None:
            return False
        t2, p2 = closed
        ones = sum(1 for t in t2.values() if t == 1)
        if len(t2) - ones > n - self.k:
            return False
        if ones + self._min_cover(frozenset(p2)) > self.k:
            return False
        self._types, self._pending = t2, p2
        return True

    # ---- round dispatch

    def _pick_script(self, n: int) -> str:
        alpha = Fraction(n - self.k, n)
        if alpha <= Fraction(1, 2):
            return "LB1"
        if alpha <= Fraction(6, 11):
            return "LB4"
        if alpha <= Fraction(3, 5):
            return "LB3"
        return "LB2"

    def respond(self, state: KnowledgeState, m: Matching) -> OutcomeVector:
        self._guard(state, m, OR)
        n = state.n
        if self._script is None:
            self._script = self._pick_script(n)
        d = self.diagnostics
        d["script"] = self._script
        if d["alpha"] is None:
            d["alpha"] = Fraction(n - self.k, n)
        rnd = len(state.graph.rounds) + 1
        script = self._script
        if rnd == 1:
            return self._round_one(state, m, n)
        if rnd == 2 and script in ("LB1", "LB3", "LB4"):
            # scripted round 2 spends Zeros on explorations only; fresh
            # teams stay pending so later rounds fail one team per Zero
            outs = self._team_loop(state, m, n, count_reveals=True,
                                   fail_fresh=False)
            got = d["r2_zero_reveals"]
            d["beta"] = Fraction(got, n)
            if script == "LB3" and got < (n - self.k) // 3:
                d["shortfalls"].append((2, "zero-reveals", got,
                                        (n - self.k) // 3))
            return outs
        if rnd == 3 and script == "LB1":
            return self._structure_round(state, m, n, 3, "independent")
        if rnd == 4 and script == "LB1" and self._need_r4:
            return self._structure_round(state, m, n, 4, "independent")
        if rnd == 3 and script == "LB4":
            return self._structure_round(state, m, n, 3, "bipartition")
        return self._team_loop(state, m, n, count_reveals=False,
                               fail_fresh=True)

    def _round_one(self, state: KnowledgeState, m: Matching,
                   n: int) -> OutcomeVector:
        teams = sorted(tuple(sorted(p)) for p in m)
        decisions: Dict[Pair, int] = {}
        script = self._script
        if script == "LB2":
            q = self.k // 2
            done11 = 0
            odd_spent = self.k % 2 == 0
            for u, v in teams:
                if done11 < q and self._attempt(n, {u: 1, v: 1}):
                    decisions[(u, v)] = 1
                    done11 += 1
                elif not odd_spent and self._attempt(n, {u: 1, v: 0}):
                    decisions[(u, v)] = 1
                    odd_spent = True
                elif self._attempt(n, {u: 0, v: 0}):
                    decisions[(u, v)] = 0
                else:
                    assert self._attempt(n, new_pending=[(u, v)])
                    decisions[(u, v)] = 1
            if done11 < q:
                self.diagnostics["shortfalls"].append(
                    (1, "paired-ones", done11, q))
        else:
            q = {"LB1": (4 * (n - self.k)) // 17,
                 "LB3": (n - self.k) // 3,
                 "LB4": (n - self.k) // 4}[script]
            fails = 0
            for u, v in teams:
                if fails < q and self._attempt(n, {u: 0, v: 0}):
                    decisions[(u, v)] = 0
                    fails += 1
                elif self._attempt(n, new_pending=[(u, v)]):
                    decisions[(u, v)] = 1
                    self._r1_pending.append((u, v))
                else:
                    assert self._attempt(n, {u: 0, v: 0})
                    decisions[(u, v)] = 0
                    fails += 1
            if fails < q:
                self.diagnostics["shortfalls"].append(
                    (1, "zero-teams", fails, q))
        return tuple(_norm(decisions[tuple(sorted(p))]) for p in m)

    def _structure_round(self, state: KnowledgeState, m: Matching, n: int,
                         rnd: int, kind: str) -> OutcomeVector:
        """Reveal a batch of Zeros among this round's explored agents.

        The batch is drawn from the unknowns the matching pairs with known
        Zeros, so every batch member fails its team at the cost of one Zero.
        independent: a greedy independent set under the pending constraints.
        bipartition: per pending component, the color class holding more of
        the explored agents.  Either way no two batch members share a
        pending pair, so their partners are forced to One consistently.
        """
        explored = []
        for u, v in sorted(tuple(sorted(p)) for p in m):
            if state.graph.label(u, v) is not None:
                continue
            tu, tv = self._types.get(u), self._types.get(v)
            if tu == 0 and tv is None:
                explored.append(v)
            elif tv == 0 and tu is None:
                explored.append(u)
        sset = set(explored)
        edges = [tuple(sorted(e)) for e in self._pending
                 if all(x in sset for x in e)]
        target = (_greedy_independent(explored, edges)
                  if kind == "independent"
                  else _majority_side(explored, edges))
        self.diagnostics["is_sizes"][rnd] = len(target)
        zeros = sum(1 for t in self._types.values() if t == 0)
        quota = (n - self.k) - zeros
        batch = target[:max(0, quota)]
        while batch and not self._attempt(n, {x: 0 for x in batch}):
            batch.pop()
        if len(target) < quota:
            self.diagnostics["gamma"] = Fraction(len(batch), n)
            self._need_r4 = self._script == "LB1" and rnd == 3
        else:
            self._need_r4 = False
        return self._team_loop(state, m, n, count_reveals=False,
                               fail_fresh=False)

    def _team_loop(self, state: KnowledgeState, m: Matching, n: int,
                   count_reveals: bool, fail_fresh: bool) -> OutcomeVector:
        """Answer one matching: reveal explored agents as Zero when feasible
        and keep fresh teams pending (fail_fresh False, the scripted rounds)
        or fail them outright when feasible (fail_fresh True, the greedy
        tail once a script has run out)."""
        r1p = {x for p in self._r1_pending for x in p}
        decisions: Dict[Pair, Numeric] = {}
        for u, v in sorted(tuple(sorted(p)) for p in m):
            lab = state.graph.label(u, v)
            if lab is not None:
                decisions[(u, v)] = lab
                continue
            tu, tv = self._types.get(u), self._types.get(v)
            if tu is not None and tv is not None:
                decisions[(u, v)] = state.synergy.apply(tu, tv)
            elif tu == 1 or tv == 1:
                decisions[(u, v)] = 1
            elif tu == 0 or tv == 0:
                x = v if tu == 0 else u
                if self._attempt(n, {x: 0}):
                    decisions[(u, v)] = 0
                    if count_reveals and x in r1p:
                        self.diagnostics["r2_zero_reveals"] += 1
                else:
                    assert self._attempt(n, {x: 1})
                    decisions[(u, v)] = 1
            elif fail_fresh:
                if self._attempt(n, {u: 0, v: 0}):
                    decisions[(u, v)] = 0
                else:
                    assert self._attempt(n, new_pending=[(u, v)])
                    decisions[(u, v)] = 1
            else:
                if self._attempt(n, new_pending=[(u, v)]):
                    decisions[(u, v)] = 1
                else:
                    assert self._attempt(n, {u: 0, v: 0})
                    decisions[(u, v)] = 0
        return tuple(_norm(decisions[tuple(sorted(p))]) for p in m)


# ------------------------------------------------------------- AND opponent

@dataclass(frozen=True)
class RevealableSet:
    """Teams that may all succeed at once, plus a witness labeling.

    edges holds the teams (sorted pairs); witness is a full type vector
    with exactly k Ones under which those teams and nothing else fresh in
    the matching come up One-One.
    """

    edges: Tuple[Pair, ...]
    witness: Tuple[int, ...]


def _condition(state: KnowledgeState,
               assignments: Sequence[Tuple[int, int]]) -> KnowledgeState:
    """The state with extra type commitments folded into its knowledge."""
    if not assignments:
        return state
    if state.is_explicit():
        viable = state.viable
        for agent, t in assignments:
            bit = (viable >> np.uint64(agent)) & np.uint64(1)
            viable = viable[bit == t]
        if len(viable) == 0:
            raise InconsistentObservation(
                "the commitments empty the viable set")
        return replace(state, viable=viable,
                       known=tuple(_known_from_viable(state.n, viable)))
    known, _ = _rules_fixed_point(state.n, state.synergy, state.graph.edges,
                                  dict(assignments), state.k,
                                  state.counting_rule)
    return replace(state, known=tuple(known))


def minimal_revealable_set(state: KnowledgeState, m: Matching,
                           k: int) -> RevealableSet:
    """Smallest set of fresh teams in m that can consistently all succeed.

    Search is by size, lexicographic within a size.  A candidate set S is
    feasible when its endpoints avoid every recorded failed pair, and the
    remaining Ones quota fits as an independent set of the failed-pair
    graph extended by the fresh teams left out of S.  Built for the
    both-types synergy, where a failed team rules out exactly the One-One
    labeling of its endpoints.
    """
    n = state.n
    mc = canonical_matching(m)
    ones = state.known_ones()
    quota = k - len(ones)
    if quota < 0:
        raise ValueError("more Ones are known than k allows")
    unknown = set(state.unknowns())
    fresh = [p for p in mc if p[0] in unknown and p[1] in unknown
             and state.graph.label(*p) is None]
    adj: Dict[int, Set[int]] = {x: set() for x in unknown}
    g_edges: List[Pair] = []
    for u, v in state.graph.edges:
        if u in unknown and v in unknown:
            g_edges.append((u, v))
            adj[u].add(v)
            adj[v].add(u)
    for size in range(0, min(len(fresh), quota // 2) + 1):
        for S in itertools.combinations(fresh, size):
            picked = {x for e in S for x in e}
            if any(w in picked for x in picked for w in adj[x]):
                continue
            blocked = picked | {w for x in picked for w in adj[x]}
            rest = sorted(unknown - blocked)
            rest_set = set(rest)
            rest_edges = [e for e in g_edges
                          if e[0] in rest_set and e[1] in rest_set]
            rest_edges += [e for e in fresh if e not in S
                           and e[0] in rest_set and e[1] in rest_set]
            ok, wit = independent_set_exists(rest, rest_edges,
                                             quota - 2 * size)
            if ok:
                lam = [0] * n
                for x in itertools.chain(ones, picked, wit):
                    lam[x] = 1
                return RevealableSet(tuple(S), tuple(lam))
    raise ValueError("no subset of the matching is revealable: the position "
                     f"admits no labeling with {k} Ones")


class AndGreedy(Adversary):
    """Two-step opponent for the both-types synergy.

    Step 1: agents teamed with an already known One are forced reveals;
    in agent-index order each comes up Zero whenever some viable labeling
    still allows it.  Revealing can mint new known Ones through counting,
    whose teammates are then forced too, so the pass repeats until no
    queued agent is left.  Step 2: among the remaining fresh teams, reveal
    the minimal set that can consistently succeed (usually empty) and fail
    everything else.
    """

    kind = "and-greedy"

    def __init__(self, k: int):
        super().__init__(k)
        self._last: Optional[Tuple[Tuple[Tuple[int, int], ...],
                                   RevealableSet]] = None

    def respond(self, state: KnowledgeState, m: Matching) -> OutcomeVector:
        self._guard(state, m, AND)
        n = state.n
        ks = state
        if not ks.is_explicit() and (ks.k is None or not ks.counting_rule):
            known, _ = _rules_fixed_point(n, ks.synergy, ks.graph.edges, {},
                                          self.k, True)
            ks = replace(ks, k=self.k, counting_rule=True, known=tuple(known))
        if ks.k != self.k:
            raise ValueError("the state carries a different k")
        mc = canonical_matching(m)
        partner: Dict[int, int] = {}
        for u, v in mc:
            partner[u], partner[v] = v, u
        cond = ks
        reveals: List[Tuple[int, int]] = []
        done: Set[int] = set()
        while True:
            ones = set(cond.known_ones())
            queue = sorted(x for x in cond.unknowns()
                           if x not in done and partner[x] in ones)
            if not queue:
                break
            for x in queue:
                t = 0 if viable_exists(ks, reveals + [(x, 0)]) else 1
                reveals.append((x, t))
                done.add(x)
            cond = _condition(ks, reveals)
        rset = minimal_revealable_set(cond, mc, self.k)
        lam = rset.witness
        outs: List[Numeric] = []
        for u, v in m:
            lab = state.graph.label(u, v)
            outs.append(_norm(lab if lab is not None else lam[u] * lam[v]))
        self._last = (tuple(reveals), rset)
        self.diagnostics.setdefault("zero_reveals", []).append(
            sum(1 for _, t in reveals if t == 0))
        self.diagnostics.setdefault("reveal_set_sizes", []).append(
            len(rset.edges))
        return tuple(outs)


# -------------------------------------------------------- lookahead opponent

class GreedyMaxRegret(Adversary):
    """Lookahead opponent for any synergy, explicit backend only.

    Picks the consistent answer with the largest immediate regret, breaking
    ties by the exact game value `depth` further rounds out (depth=None
    plays the whole continuation) and then by the lexicographically
    smallest outcome vector.  depth >= 1 needs n small enough to enumerate
    matchings; depth 0 has no such cap.
    """

    kind = "greedy"

    def __init__(self, k: int, depth: Optional[int] = 0):
        super().__init__(k)
        if depth is not None and depth < 0:
            raise ValueError("depth must be nonnegative or None")
        self.depth = depth
        self._game: Optional[MatchingGame] = None

    def respond(self, state: KnowledgeState, m: Matching) -> OutcomeVector:
        self._guard(state, m, None)
        if not state.is_explicit():
            raise ValueError("GreedyMaxRegret needs the explicit backend")
        if state.k != self.k:
            raise ValueError("the state carries a different k")
        n = state.n
        if (self._game is None or self._game.n != n
                or self._game.synergy.values() != state.synergy.values()):
            self._game = MatchingGame(n, self.k, state.synergy)
        game = self._game
        mc = canonical_matching(m)
        best: Optional[Tuple[Fraction, Fraction, Tuple[Fraction, ...]]] = None
        for c in game.outcome_classes(state, mc):
            if self.depth == 0:
                fut = Fraction(0)
            else:
                succ = replace(state,
                               graph=state.graph.with_round(mc, c.outcomes),
                               viable=c.viable,
                               known=tuple(_known_from_viable(n, c.viable)))
                fut = game.value(succ, self.depth)
            cand = (c.regret, fut, c.outcomes)
            if (best is None or (cand[0], cand[1]) > (best[0], best[1])
                    or ((cand[0], cand[1]) == (best[0], best[1])
                        and cand[2] < best[2])):
                best = cand
        assert best is not None
        by_pair = dict(zip(mc, best[2]))
        return tuple(_norm(by_pair[tuple(sorted(p))]) for p in m)


# --------------------------------------------------------- one-shot entries

@dataclass(frozen=True)
class AndGreedyStep:
    """One AndGreedy round split into its two steps."""

    outcomes: OutcomeVector
    reveals: Tuple[Tuple[int, int], ...]
    reveal_set: RevealableSet


def and_greedy_step(state: KnowledgeState, m: Matching,
                    k: int) -> AndGreedyStep:
    """One AndGreedy round as a pure function of the position."""
    adv = AndGreedy(k)
    outs = adv.respond(state, m)
    assert adv._last is not None
    reveals, rset = adv._last
    return AndGreedyStep(outs, reveals, rset)


@dataclass(frozen=True)
class OrStep:
    """One scripted OR round plus the script's diagnostics."""

    outcomes: OutcomeVector
    diagnostics: Dict[str, object]


def or_scripted_step(state: KnowledgeState, m: Matching, k: int,
                     script: str = "BEST") -> OrStep:
    """One scripted OR round, reconstructed from the recorded history.

    Every recorded round is replayed through a fresh opponent and checked
    against the recorded outcomes before m is answered; a mismatch means
    the history is not a play of this script and raises ValueError.
    """
    adv = OrScripted(k, script)
    cur = KnowledgeState.fresh(state.n, state.synergy, k=state.k,
                               explicit=state.is_explicit(),
                               counting_rule=state.counting_rule)
    for mi in state.graph.rounds:
        recorded = tuple(_norm(state.graph.label(u, v)) for u, v in mi)
        got = adv.respond(cur, mi)
        if tuple(_norm(x) for x in got) != recorded:
            raise ValueError("the recorded history is not a play of this "
                             "script")
        cur = observe(cur, mi, got)
    return OrStep(adv.respond(cur, m), dict(adv.diagnostics))


def greedy_max_regret(state: KnowledgeState, m: Matching, k: int,
                      lookahead: Optional[int] = 0) -> OutcomeVector:
    """The outcome vector a lookahead opponent picks for m, statelessly."""
    return GreedyMaxRegret(k, lookahead).respond(state, m)


def make_adversary(name: str, k: int) -> Adversary:
    """Build an opponent from its command-line name."""
    key = name.strip().lower()
    if key == "eq-bipartite":
        return EqBipartite(k)
    if key == "xor-cycle":
        return XorCycle(k)
    if key == "and-greedy":
        return AndGreedy(k)
    if key == "or-best":
        return OrScripted(k, "BEST")
    if key.startswith("or-lb") and key[5:] in ("1", "2", "3", "4"):
        return OrScripted(k, "LB" + key[5:])
    if key == "greedy":
        return GreedyMaxRegret(k, 0)
    if key.startswith("greedy:"):
        arg = key.split(":", 1)[1]
        try:
            depth = None if arg in ("inf", "full") else int(arg)
        except ValueError:
            raise ValueError(f"bad lookahead depth {arg!r}") from None
        return GreedyMaxRegret(k, depth)
    raise ValueError(f"unknown adversary {name!r}")
