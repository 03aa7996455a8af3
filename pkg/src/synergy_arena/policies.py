"""Team-formation policies.

A policy emits one perfect matching per round, seeing only the k-blind
knowledge view (play history plus rule deductions).  Policies here fall in
three families: the three-round matching policies for same-type and
different-type synergies, the explore-and-exploit policy for one-sided
synergies, and factorization schedules (the repairable ring, the circle
method, and clique-first doubling).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .core import Matching, Pair, canonical_matching
from .exploration import (KnowledgeState, ONE, UNKNOWN, ZERO,
                          optimal_matching_known)


def _pair(u: int, v: int) -> Pair:
    return (u, v) if u < v else (v, u)


def lex_matching(n: int) -> Matching:
    """((0,1), (2,3), ...): the canonical opening round."""
    return tuple((i, i + 1) for i in range(0, n, 2))


def _pair_up(agents: Sequence[int]) -> List[Pair]:
    """Pair a sorted even-length list consecutively."""
    a = sorted(agents)
    if len(a) % 2:
        raise ValueError(f"cannot pair odd group {a}")
    return [(a[i], a[i + 1]) for i in range(0, len(a), 2)]


class Policy:
    """Base: one matching per call, `locked` set once the policy commits."""

    name = "policy"

    def __init__(self, n: int):
        if n % 2:
            raise ValueError("n must be even")
        self.n = n
        self.locked: Optional[Matching] = None

    def next_matching(self, view: KnowledgeState) -> Matching:
        raise NotImplementedError


# ------------------------------------------------- same-type / three rounds

class FormUniformTeams(Policy):
    """Pair-swap protocol for synergies that reward identical types.

    Failed opening teams are swapped in quads; a quad whose swap also fails
    is resolved by its third matching.  The round-3 matching is optimal and
    is replayed from then on.
    """

    name = "uniform"

    def __init__(self, n: int):
        super().__init__(n)
        self.quads: List[Tuple[Pair, Pair]] = []
        self.round2: Optional[Matching] = None

    def next_matching(self, view: KnowledgeState) -> Matching:
        if self.locked is not None:
            return self.locked
        g = view.graph
        r = len(g.rounds)
        if r == 0:
            return lex_matching(self.n)
        if r == 1:
            m1 = g.rounds[0]
            failures = sorted(_pair(*p) for p in m1 if g.label(*p) == 0)
            keep = [p for p in m1 if g.label(*p) != 0]
            pairs: List[Pair] = list(keep)
            for i in range(0, len(failures) - 1, 2):
                (a, b), (c, d) = failures[i], failures[i + 1]
                self.quads.append((failures[i], failures[i + 1]))
                pairs += [(a, c), (b, d)]
            if len(failures) % 2:
                pairs.append(failures[-1])
            self.round2 = canonical_matching(pairs)
            return self.round2
        # round 3: both swap teams of a twice-failed quad fail together, so
        # checking one of them suffices
        pairs = []
        swapped: Set[Pair] = set()
        for (a, b), (c, d) in self.quads:
            swapped |= {_pair(a, c), _pair(b, d)}
            if g.label(a, c) == 0:
                pairs += [(a, d), (b, c)]
            else:
                pairs += [(a, c), (b, d)]
        pairs += [p for p in self.round2 if _pair(*p) not in swapped]
        self.locked = canonical_matching(pairs)
        return self.locked


# -------------------------------------------- different-type / three rounds

class FormDiverseTeams(Policy):
    """Cycle-shift protocol for synergies that reward mixed types.

    Failed opening teams are re-paired along a single cycle; after that
    round the type partition is pinned up to relabeling and the optimal
    matching is forced.
    """

    name = "diverse"

    def next_matching(self, view: KnowledgeState) -> Matching:
        if self.locked is not None:
            return self.locked
        g = view.graph
        r = len(g.rounds)
        if r == 0:
            return lex_matching(self.n)
        if r == 1:
            m1 = g.rounds[0]
            fail = sorted(_pair(*p) for p in m1 if g.label(*p) == 0)
            keep = [p for p in m1 if g.label(*p) != 0]
            if len(fail) < 2:
                # nothing to shift: the opening matching was already optimal
                self.locked = canonical_matching(m1)
                return self.locked
            xs: List[int] = [a for p in fail for a in p]
            pairs = [(xs[-1], xs[0])]
            pairs += [(xs[i], xs[i + 1]) for i in range(1, len(xs) - 1, 2)]
            return canonical_matching(pairs + keep)
        m = optimal_matching_known(view)
        assert m is not None, "cycle shift must pin the optimal matching"
        self.locked = m
        return self.locked


# ---------------------------------------------- explore/exploit (one-sided)

@dataclass
class ExploitCounters:
    """Per-round bookkeeping used by the progress arguments."""

    discovered: int = 0   # known-0s found by pairing two unknowns
    explored: int = 0     # known-0s found by probing with a known 0
    delta: int = 0        # known-0 surplus after the round


class MaxExploit(Policy):
    """Probe unknowns with surplus known-0s; restructure the survivors.

    Keeps its own conventional knowledge: a probe outcome reveals exactly
    the probed agent, a failed unknown-unknown team reveals both members
    plus their partners along earlier successful teams, and nothing else
    counts even when more is deducible.
    """

    name = "maxexploit"

    def __init__(self, n: int):
        super().__init__(n)
        self.k0: Set[int] = set()
        self.k1: Set[int] = set()
        self.succ: Dict[int, Set[int]] = {i: set() for i in range(n)}
        self.last_team: Dict[int, Pair] = {}
        self.cycles: List[Tuple[Pair, Pair]] = []
        self.planned: List[List[Tuple[str, Pair]]] = []
        self.processed = 0
        self.counters: List[ExploitCounters] = []

    # conventional-knowledge ingestion

    def _mark_zero_discovered(self, x: int) -> None:
        self.k0.add(x)
        for w in sorted(self.succ[x]):
            if w not in self.k0 and w not in self.k1:
                self.k1.add(w)

    def _ingest(self, view: KnowledgeState) -> None:
        g = view.graph
        while self.processed < len(g.rounds):
            plan = self.planned[self.processed]
            c = ExploitCounters()
            for kind, (u, v) in plan:
                o = g.label(u, v)
                if kind == "probe":
                    # u is the known 0, v the target
                    if v in self.k0 or v in self.k1:
                        continue
                    if o == 0:
                        self.k0.add(v)
                        c.explored += 1
                    else:
                        self.k1.add(v)
                elif kind == "pair":
                    known = (u in self.k0 or u in self.k1
                             or v in self.k0 or v in self.k1)
                    if known:
                        continue
                    if o == 0:
                        self._mark_zero_discovered(u)
                        self._mark_zero_discovered(v)
                        c.discovered += 2
                    else:
                        self.succ[u].add(v)
                        self.succ[v].add(u)
                        self.last_team[u] = _pair(u, v)
                        self.last_team[v] = _pair(u, v)
            c.delta = len(self.k0) - len(self.k1)
            self.counters.append(c)
            self.processed += 1

    # matching construction

    def _emit(self, plan: List[Tuple[str, Pair]]) -> Matching:
        self.planned.append(plan)
        m = canonical_matching([p for _, p in plan])
        return m

    def _unknown_teams(self, rest: Set[int]) -> List[Pair]:
        teams = []
        for x in sorted(rest):
            t = self.last_team.get(x)
            if t and t[0] in rest and t[1] in rest and t not in teams:
                teams.append(t)
        return teams

    def _try_lock(self, teams: List[Pair], stragglers: List[int]
                  ) -> Optional[List[Tuple[str, Pair]]]:
        """All-teams-certain matching: known 1s cover every loose end."""
        ones, zeros = sorted(self.k1), sorted(self.k0)
        s = len(stragglers)
        if len(ones) - len(zeros) < s:
            return None
        plan = [("noop", _pair(o, x)) for o, x in zip(ones[:s], stragglers)]
        rest_ones = ones[s:]
        plan += [("noop", _pair(z, o)) for z, o in zip(zeros, rest_ones)]
        plan += [("noop", p) for p in _pair_up(rest_ones[len(zeros):])]
        plan += [("pair", t) for t in teams]
        return plan

    def next_matching(self, view: KnowledgeState) -> Matching:
        self._ingest(view)
        if self.locked is not None:
            self.planned.append([("noop", p) for p in self.locked])
            return self.locked
        r = len(view.graph.rounds) + 1
        if r == 1:
            return self._emit([("pair", p) for p in lex_matching(self.n)])
        unknown = sorted(set(range(self.n)) - self.k0 - self.k1)
        if not unknown:
            ones, zeros = sorted(self.k1), sorted(self.k0)
            cross = min(len(ones), len(zeros))
            pairs = [_pair(zeros[i], ones[i]) for i in range(cross)]
            pairs += _pair_up(zeros[cross:]) + _pair_up(ones[cross:])
            self.locked = canonical_matching(pairs)
            self.planned.append([("noop", p) for p in self.locked])
            return self.locked

        rest = set(unknown)
        teams = self._unknown_teams(rest)
        in_team = {x for t in teams for x in t}
        stragglers = [x for x in unknown if x not in in_team]
        lock_plan = self._try_lock(teams, stragglers)
        if lock_plan is not None:
            self.locked = canonical_matching([p for _, p in lock_plan])
            self.planned.append(lock_plan)
            return self.locked

        ones, zeros = sorted(self.k1), sorted(self.k0)
        cross = min(len(ones), len(zeros))
        plan: List[Tuple[str, Pair]] = [("noop", _pair(zeros[i], ones[i]))
                                        for i in range(cross)]
        spare_ones = ones[cross:]
        extras = zeros[cross:]

        # probe targets in protocol order
        if r == 3:
            order: List[int] = []
            for t1, t2 in self.cycles:
                order += [x for x in sorted((*t1, *t2))
                          if x in rest and x not in order]
            order += [x for x in unknown if x not in order]
        else:
            order = []
            for t in teams:
                order += [t[0], t[1]]
            order += [x for x in unknown if x not in order]
        probes = list(zip(extras, order))
        plan += [("probe", (z, x)) for z, x in probes]
        extras = extras[len(probes):]
        rest -= {x for _, x in probes}

        # restructure what survives
        singles: List[int]
        if r == 2:
            ts = self._unknown_teams(rest)
            for i in range(0, len(ts) - 1, 2):
                (a, b), (c, d) = ts[i], ts[i + 1]
                self.cycles.append((ts[i], ts[i + 1]))
                plan += [("pair", _pair(a, c)), ("pair", _pair(b, d))]
            if len(ts) % 2:
                plan.append(("pair", ts[-1]))
            covered = {x for t in ts for x in t}
            singles = sorted(rest - covered)
        elif r == 3:
            used: Set[int] = set()
            for t1, t2 in self.cycles:
                quad = {*t1, *t2}
                if quad <= rest:
                    (a, b), (c, d) = t1, t2
                    plan += [("pair", _pair(a, d)), ("pair", _pair(b, c))]
                    used |= quad
            for t in self._unknown_teams(rest - used):
                plan.append(("pair", t))
                used |= {*t}
            singles = sorted(rest - used)
        else:
            ts = self._unknown_teams(rest)
            plan += [("pair", t) for t in ts]
            covered = {x for t in ts for x in t}
            singles = sorted(rest - covered)

        # leftovers: singles + spare_ones + extras has even total size
        if len(singles) % 2:
            s = singles.pop()
            if extras:
                plan.append(("probe", (extras[0], s)))
                extras = extras[1:]
            else:
                assert spare_ones, "parity broke in matching assembly"
                plan.append(("noop", _pair(spare_ones[0], s)))
                spare_ones = spare_ones[1:]
        plan += [("pair", p) for p in _pair_up(singles)]
        if len(spare_ones) % 2:
            assert extras, "parity broke in matching assembly"
            plan.append(("noop", _pair(spare_ones[-1], extras[0])))
            spare_ones, extras = spare_ones[:-1], extras[1:]
        plan += [("noop", p) for p in _pair_up(spare_ones)]
        plan += [("noop", p) for p in _pair_up(extras)]
        return self._emit(plan)


# --------------------------------------------------------- ring factorization

def _phase_cycles(m: int, step: int) -> List[List[int]]:
    """Cycles of the step-`step` circulant on columns 0..m-1."""
    g = gcd(m, step)
    return [[(s + t * step) % m for t in range(m // g)] for s in range(g)]


def rounds_in_phase(m: int, p: int) -> int:
    if p == 0:
        return 1
    if m % 2 == 0 and p == m // 2:
        return 2
    return 4


def max_phase(m: int) -> int:
    return m // 2


# template edges join ((pos, row), (pos, row)) pairs with row 0=top 1=bottom;
# every edge joins cyclically adjacent positions

def _cycle_round_edges(j: int, rnd: int) -> List[Tuple[Tuple[int, int],
                                                       Tuple[int, int]]]:
    T = lambda t: (t % j, 0)
    B = lambda t: (t % j, 1)
    if rnd == 1:
        return [(T(t), B(t + 1)) for t in range(j)]
    if j % 2 == 0:
        if rnd == 2:
            return ([(T(2 * t), T(2 * t + 1)) for t in range(j // 2)]
                    + [(B(2 * t + 1), B(2 * t + 2)) for t in range(j // 2)])
        if rnd == 3:
            return [(B(t), T(t + 1)) for t in range(j)]
        if rnd == 4:
            return ([(T(2 * t + 1), T(2 * t + 2)) for t in range(j // 2)]
                    + [(B(2 * t), B(2 * t + 1)) for t in range(j // 2)])
    else:
        if rnd == 2:
            return ([(B(0), T(1))]
                    + [(T(2 * t), T(2 * t + 1))
                       for t in range(1, (j + 1) // 2)]
                    + [(B(2 * t + 1), B(2 * t + 2))
                       for t in range((j - 1) // 2)])
        if rnd == 3:
            return ([(B(0), B(1)), (T(1), T(2))]
                    + [(B(t), T(t + 1)) for t in range(2, j)])
        if rnd == 4:
            return ([(B(1), T(2)), (T(0), T(1))]
                    + [(T(2 * t + 1), T(2 * t + 2))
                       for t in range(1, (j - 1) // 2)]
                    + [(B(2 * t), B(2 * t + 1))
                       for t in range(1, (j + 1) // 2)])
    raise ValueError(f"round {rnd} out of range")


def _final_phase_edges(h: int, rnd: int) -> List[Tuple[Tuple[int, int],
                                                       Tuple[int, int]]]:
    """Antipodal phase on 2h columns, absolute column indices."""
    if rnd == 1:
        return ([((c, 0), (c + h, 0)) for c in range(h)]
                + [((c, 1), (c + h, 1)) for c in range(h)])
    if rnd == 2:
        return ([((c, 0), (c + h, 1)) for c in range(h)]
                + [((c, 1), (c + h, 0)) for c in range(h)])
    raise ValueError(f"round {rnd} out of range")


def ring_factorization(n: int) -> List[Matching]:
    """A 1-factorization of K_n built from two rings of n/2 agents.

    Phase 0 pairs each column; phase i (four rounds) covers all edges
    between columns at ring distance i; when n/2 is even a final two-round
    phase covers the antipodal columns.  Total: n-1 matchings.
    """
    if n % 2 or n < 2:
        raise ValueError("n must be even and positive")
    m = n // 2
    cols = [(2 * c, 2 * c + 1) for c in range(m)]
    out: List[Matching] = [canonical_matching(cols)]
    for p in range(1, (m + 1) // 2):
        for rnd in range(1, 5):
            pairs: List[Pair] = []
            for cyc in _phase_cycles(m, p):
                for (t1, r1), (t2, r2) in _cycle_round_edges(len(cyc), rnd):
                    pairs.append(_pair(cols[cyc[t1]][r1], cols[cyc[t2]][r2]))
            out.append(canonical_matching(pairs))
    if m % 2 == 0 and m >= 2:
        for rnd in (1, 2):
            pairs = []
            for (c1, r1), (c2, r2) in _final_phase_edges(m // 2, rnd):
                pairs.append(_pair(cols[c1][r1], cols[c2][r2]))
            out.append(canonical_matching(pairs))
    assert len(out) == n - 1
    return out


# ------------------------------------------------------- scheduled baselines

class ScheduledPolicy(Policy):
    """Plays a fixed list of matchings, then locks from what it saw."""

    def __init__(self, n: int, schedule: List[Matching]):
        super().__init__(n)
        self.schedule = schedule
        self.i = 0

    def _lock_from(self, view: KnowledgeState) -> Matching:
        by = view.synergy.values()
        if by[0] == by[1] and by[1] < by[2]:
            # pairs of ones carry the score; after a full factorization
            # every such pair has shown itself
            ones = view.known_ones()
            if len(ones) % 2:
                ones = ones[:-1]
            pairs = _pair_up(ones)
            rest = sorted(set(range(self.n)) - {a for p in pairs for a in p})
            return canonical_matching(pairs + _pair_up(rest))
        if not view.unknowns():
            ones = view.known_ones()
            zeros = view.known_zeros()
            if by[1] == by[2] and by[0] < by[1]:  # any one carries its team
                cross = min(len(ones), len(zeros))
                pairs = [_pair(zeros[i], ones[i]) for i in range(cross)]
                pairs += _pair_up(zeros[cross:]) + _pair_up(ones[cross:])
                return canonical_matching(pairs)
        m = optimal_matching_known(view)
        return m if m is not None else self.schedule[-1]

    def next_matching(self, view: KnowledgeState) -> Matching:
        if self.i < len(self.schedule):
            m = self.schedule[self.i]
            self.i += 1
            return m
        if self.locked is None:
            self.locked = self._lock_from(view)
        return self.locked


class NaiveFactorization(ScheduledPolicy):
    """The circle method: fix one agent, rotate the rest."""

    name = "naive"

    def __init__(self, n: int):
        rounds: List[Matching] = []
        for r in range(n - 1):
            pairs = [(n - 1, r)]
            for j in range(1, n // 2):
                pairs.append(_pair((r + j) % (n - 1), (r - j) % (n - 1)))
            rounds.append(canonical_matching(pairs))
        super().__init__(n, rounds)


class CliqueFirstFactorization(ScheduledPolicy):
    """Completes small cliques before spreading out.

    Starts from pairs and repeatedly merges neighbouring cliques with all
    cross matchings; an odd clique out is carried forward unchanged, so its
    internal pairs are replayed.  Covers every edge, with repeats.
    """

    name = "clique-first"

    def __init__(self, n: int):
        cliques: List[List[int]] = [[i, i + 1] for i in range(0, n, 2)]
        rounds: List[Matching] = [lex_matching(n)]
        while len(cliques) > 1:
            merged: List[Tuple[List[int], List[int]]] = []
            nxt: List[List[int]] = []
            i = 0
            while i + 1 < len(cliques):
                a, b = cliques[i], cliques[i + 1]
                if len(a) > len(b):
                    a, b = b, a
                merged.append((a, b))
                nxt.append(cliques[i] + cliques[i + 1])
                i += 2
            carry = cliques[i:]
            width = max(len(b) for _, b in merged)
            for r in range(width):
                pairs: List[Pair] = []
                for a, b in merged:
                    if r < len(b):
                        hit = {b[(t + r) % len(b)] for t in range(len(a))}
                        for t, x in enumerate(a):
                            pairs.append(_pair(x, b[(t + r) % len(b)]))
                        pairs += _pair_up([y for y in b if y not in hit])
                    else:
                        pairs += _pair_up(a) + _pair_up(b)
                for c in carry:
                    pairs += _pair_up(c)
                rounds.append(canonical_matching(pairs))
            cliques = nxt + carry
        super().__init__(n, rounds)


# ----------------------------------------------------------- repairable ring

@dataclass(frozen=True)
class RingLayout:
    """Snapshot of the ring state for traces and tests."""

    columns: Tuple[Pair, ...]
    phase: int
    rounds_done: int
    locked_pairs: Tuple[Pair, ...]
    explorers: Tuple[int, ...]
    survivor: Optional[int]


@dataclass
class RepairEvent:
    """One removal: z zeros and w ones leave the ring permanently."""

    round_index: int
    case: str
    removed_cols: Tuple[Pair, ...]
    z: int
    w: int
    x: int
    resume: Tuple[int, int]
    targets: Tuple[int, ...] = ()
    flags: Tuple[str, ...] = ()


class _EdgeOracle:
    """Per-round edge classification against the rule knowledge."""

    def __init__(self, view: KnowledgeState):
        self.g = view.graph
        self.known = view.known
        self.by = view.synergy.values()

    def played(self, u: int, v: int) -> bool:
        return self.g.label(u, v) is not None

    def determined(self, u: int, v: int) -> bool:
        if self.g.label(u, v) is not None:
            return True
        ku, kv = self.known[u], self.known[v]
        if ku != UNKNOWN and kv != UNKNOWN:
            return True
        by = self.by
        if by[1] == by[2] and ONE in (ku, kv):
            return True
        if by[0] == by[1] and ZERO in (ku, kv):
            return True
        return False

    def free(self, u: int, v: int) -> bool:
        """Replayable at no cost: both endpoints pinned to the same type."""
        ku, kv = self.known[u], self.known[v]
        return (ku, kv) in ((ZERO, ZERO), (ONE, ONE))

    def fresh_or_free(self, u: int, v: int) -> bool:
        return not self.played(u, v) or self.free(u, v)

    def unknown_ends(self, u: int, v: int) -> List[int]:
        return [a for a in (u, v) if self.known[a] == UNKNOWN]


@dataclass
class _Verdict:
    status: str                      # "ok" | "blocked"
    cost: int                        # costly replays the resume would incur
    targets: List[int]               # agents to probe before resuming
    orients: List[List[int]]         # oriented distance-p cycles
    swaps: Dict[int, int]            # column -> flip top/bottom


class RingWeaver(Policy):
    """Ring factorization with removal-based repair.

    Plays the two-ring schedule; whenever ring agents become known ones it
    removes a fully-known zone of columns around them (pairing the removed
    agents off permanently), verifies that the shrunken ring can resume the
    schedule, and has the removed ones probe any missing prerequisite edges
    before resuming.
    """

    name = "ring"

    def __init__(self, n: int):
        super().__init__(n)
        self.cols: List[Pair] = [(2 * c, 2 * c + 1) for c in range(n // 2)]
        self.p = 0
        self.r = 0
        self.orients: List[List[int]] = []
        self.locked_pairs: List[Pair] = []
        self.explorers: List[int] = []
        self.survivor: Optional[int] = None
        self.pending: List[int] = []
        self.events: List[RepairEvent] = []
        self.flags: List[str] = []

    # ---- introspection

    def layout_snapshot(self) -> RingLayout:
        return RingLayout(tuple(self.cols), self.p, self.r,
                          tuple(self.locked_pairs), tuple(self.explorers),
                          self.survivor)

    def _ring_agents(self) -> List[int]:
        return sorted(a for col in self.cols for a in col)

    # ---- verification

    def _verify(self, oracle: _EdgeOracle, cols: List[Pair], p: int, r: int,
                fixed_orients: Optional[List[List[int]]] = None) -> _Verdict:
        """Check that the schedule can resume at (p, r) on `cols`.

        Edges at distance < p (and all within-column edges) must be
        determined; edges at distance > p must be fresh or freely
        replayable; distance-p edges split by the round templates under the
        best orientation (or the fixed one already being played).
        """
        m = len(cols)
        targets: List[int] = []
        cost = 0
        complete = (p > max_phase(m)
                    or (p == max_phase(m) and r >= rounds_in_phase(m, p)))
        if complete:
            p, r = max_phase(m) + 1, 0
        mid = (0 < p <= max_phase(m) and r < rounds_in_phase(m, p))
        for d in range(0, m // 2 + 1):
            if d == p and mid:
                continue   # handled per-cycle below
            for c in range(m):
                c2 = (c + d) % m
                if 2 * d == m and c >= m // 2:
                    continue   # antipodal pairs are visited from both ends
                if d == 0:
                    edges = [(cols[c][0], cols[c][1])]
                else:
                    edges = [(cols[c][r1], cols[c2][r2])
                             for r1 in (0, 1) for r2 in (0, 1)]
                for u, v in edges:
                    if d <= p:
                        if not oracle.determined(u, v):
                            targets += oracle.unknown_ends(u, v)
                    elif not oracle.fresh_or_free(u, v):
                        cost += 1
        orients: List[List[int]] = []
        swaps: Dict[int, int] = {}
        if mid:
            if m % 2 == 0 and p == m // 2:
                c2, t2, sw = self._verify_final_phase(oracle, cols, r)
                cost += c2
                targets += t2
                swaps.update(sw)
            else:
                for cyc in _phase_cycles(m, p):
                    got = self._verify_cycle(oracle, cols, cyc, r,
                                             fixed_orients)
                    (probes, replays), tg, oriented, cyc_swaps = got
                    cost += replays
                    targets += tg
                    orients.append(oriented)
                    swaps.update(cyc_swaps)
        targets = sorted(set(targets))
        return _Verdict("ok" if not targets else "blocked", cost, targets,
                        orients, swaps)

    def _verify_final_phase(self, oracle: _EdgeOracle, cols: List[Pair],
                            r: int) -> Tuple[int, List[int], Dict[int, int]]:
        h = len(cols) // 2
        cost, targets = 0, []
        swaps: Dict[int, int] = {}
        for c in range(h):
            a, b = cols[c], cols[c + h]
            best = None
            for sw in (0, 1):
                bb = (b[1], b[0]) if sw else b
                straight = [(a[0], bb[0]), (a[1], bb[1])]
                diag = [(a[0], bb[1]), (a[1], bb[0])]
                past = straight if r >= 1 else []
                future = diag if r >= 1 else straight + diag
                tg: List[int] = []
                cc = 0
                for u, v in past:
                    if not oracle.determined(u, v):
                        tg += oracle.unknown_ends(u, v)
                for u, v in future:
                    if not oracle.fresh_or_free(u, v):
                        cc += 1
                cand = ((len(tg), cc), tg, sw)
                if best is None or cand[0] < best[0]:
                    best = cand
            _, tg, sw = best
            targets += tg
            cost += best[0][1]
            if sw:
                swaps[c + h] = 1
        return cost, targets, swaps

    def _verify_cycle(self, oracle: _EdgeOracle, cols: List[Pair],
                      cyc: List[int], r: int,
                      fixed_orients: Optional[List[List[int]]]
                      ) -> Tuple[Tuple[int, int], List[int], List[int],
                                 Dict[int, int]]:
        """Best (probes, replays) over rotations, reflections and column
        swaps of one distance-p cycle; swaps already baked count as 0."""
        j = len(cyc)
        edge_sets = [(rnd, _cycle_round_edges(j, rnd))
                     for rnd in range(1, 5)]
        if fixed_orients is not None:
            for oriented in fixed_orients:
                if set(oriented) == set(cyc):
                    res = self._cycle_dp(oracle, cols, oriented, edge_sets,
                                         r, fixed=True)
                    assert res is not None
                    cost, tg, _ = res
                    return cost, tg, oriented, {}
            raise AssertionError("fixed orientation missing a cycle")
        best = None
        for s in range(j):
            for d in (1, -1):
                order = [cyc[(s + d * t) % j] for t in range(j)]
                res = self._cycle_dp(oracle, cols, order, edge_sets, r)
                if res is None:
                    continue
                cost, tg, swbits = res
                if best is None or cost < best[0]:
                    sw = {order[t]: swbits[t] for t in range(j) if swbits[t]}
                    best = (cost, tg, order, sw)
        assert best is not None, "cycle verification found no orientation"
        return best

    def _cycle_dp(self, oracle: _EdgeOracle, cols: List[Pair],
                  order: List[int], edge_sets, r: int, fixed: bool = False
                  ) -> Optional[Tuple[Tuple[int, int], List[int],
                                      List[int]]]:
        """Min-cost column-swap assignment along one oriented cycle.

        Template edges join consecutive positions, so a two-state pass over
        the swap bit suffices; the cycle closes on the first bit.  Probing
        costs dominate replay costs.
        """
        j = len(order)
        by_pos: List[List[Tuple[int, Tuple[int, int], Tuple[int, int]]]] = \
            [[] for _ in range(j)]
        for rnd, edges in edge_sets:
            for (t1, r1), (t2, r2) in edges:
                if (t2 - t1) % j == 1:
                    lo, e1, e2 = t1, (r1, 0), (r2, 1)
                else:
                    lo, e1, e2 = t2, (r2, 0), (r1, 1)
                by_pos[lo].append((rnd, e1, e2))

        def edge_state(rnd: int, u: int, v: int) -> Tuple[int, int, bool]:
            # (probe cost, replay cost, contributes targets)
            if rnd <= r:
                if oracle.determined(u, v):
                    return (0, 0, False)
                return (1, 0, True)
            if oracle.fresh_or_free(u, v):
                return (0, 0, False)
            return (0, 1, False)

        best_total = None
        for first in ((0,) if fixed else (0, 1)):
            dp: Dict[int, Tuple[Tuple[int, int], List[int], List[int]]] = {
                first: ((0, 0), [first], [])}
            for t in range(j):
                ndp: Dict[int, Tuple[Tuple[int, int], List[int],
                                     List[int]]] = {}
                closing = t == j - 1
                for sw, (cost, bits, tgs) in dp.items():
                    options = ((first,) if closing
                               else (0,) if fixed else (0, 1))
                    for nsw in options:
                        pc, rc, tg = cost[0], cost[1], list(tgs)
                        for rnd, (row1, side1), (row2, side2) in by_pos[t]:
                            b1 = sw if side1 == 0 else nsw
                            b2 = sw if side2 == 0 else nsw
                            u = cols[order[t]][row1 ^ b1]
                            v = cols[order[(t + 1) % j]][row2 ^ b2]
                            epc, erc, hast = edge_state(rnd, u, v)
                            pc += epc
                            rc += erc
                            if hast:
                                tg += oracle.unknown_ends(u, v)
                        key = nsw
                        val = ((pc, rc), bits + ([] if closing else [nsw]),
                               tg)
                        if key not in ndp or val[0] < ndp[key][0]:
                            ndp[key] = val
                dp = ndp
            if first in dp:
                cand = dp[first]
                if best_total is None or cand[0] < best_total[0]:
                    best_total = cand
        if best_total is None:
            return None
        cost, bits, tgs = best_total
        return cost, tgs, bits

    # ---- schedule bookkeeping

    def _bake(self, swaps: Dict[int, int]) -> None:
        for c, sw in swaps.items():
            if sw:
                t, b = self.cols[c]
                self.cols[c] = (b, t)

    def _advance_phase(self, oracle: _EdgeOracle) -> None:
        m = len(self.cols)
        while (self.p <= max_phase(m)
               and self.r >= rounds_in_phase(m, self.p)):
            self.p += 1
            self.r = 0
            if 0 < self.p <= max_phase(m):
                v = self._verify(oracle, self.cols, self.p, 0)
                self._bake(v.swaps)
                self.orients = v.orients
                if v.cost:
                    self.flags.append(f"phase{self.p}-entry-replays:{v.cost}")

    def _scheduled_edges(self, p: int, rnd: int) -> List[Pair]:
        m = len(self.cols)
        if p == 0:
            return [_pair(*col) for col in self.cols]
        if m % 2 == 0 and p == m // 2:
            return [_pair(self.cols[c1][r1], self.cols[c2][r2])
                    for (c1, r1), (c2, r2) in _final_phase_edges(m // 2, rnd)]
        pairs: List[Pair] = []
        for cyc in self.orients:
            for (t1, r1), (t2, r2) in _cycle_round_edges(len(cyc), rnd):
                pairs.append(_pair(self.cols[cyc[t1]][r1],
                                   self.cols[cyc[t2]][r2]))
        return pairs

    # ---- repair

    def _repair_attempt(self, view: KnowledgeState,
                        oracle: _EdgeOracle) -> None:
        ring = self._ring_agents()
        ones = [a for a in ring if view.known[a] == ONE
                and a != self.survivor]
        if not ones:
            return
        col_of = {a: c for c, col in enumerate(self.cols) for a in col}
        surv_extra = ([self.survivor] if self.survivor in col_of else [])
        all_ones = sorted(set(ones) | set(surv_extra))
        best = None
        for surv_col in self._survivor_choices(view, all_ones, col_of):
            removed = [a for a in all_ones if col_of[a] != surv_col]
            if len(removed) % 2:
                continue
            surv_agent = None
            if surv_col is not None:
                surv_agent = next(a for a in all_ones
                                  if col_of[a] == surv_col)
            must = sorted({col_of[a] for a in removed})
            if not must:
                continue
            probers = len(removed) + len(self.explorers)
            for zone in self._zone_choices(view, must, surv_col):
                new_cols = [col for c, col in enumerate(self.cols)
                            if c not in zone]
                for p2, r2 in self._resume_choices(len(new_cols)):
                    v = self._verify(oracle, new_cols, p2, r2)
                    blocked = len(v.targets) > 0
                    if blocked and not (removed or self.explorers):
                        continue   # nobody to probe with
                    est = self._est_rounds(len(new_cols), p2, r2,
                                           len(v.targets), probers)
                    rank = (est, blocked, v.cost, len(zone), p2, r2,
                            tuple(sorted(zone)))
                    cand = (rank, zone, new_cols, (p2, r2), v,
                            surv_agent, removed)
                    if best is None or rank < best[0]:
                        best = cand
        if best is None:
            self.flags.append(
                f"repair-deferred-round-{len(view.graph.rounds)}")
            return
        self._execute_repair(view, oracle, best)

    def _survivor_choices(self, view: KnowledgeState, all_ones: List[int],
                          col_of: Dict[int, int]) -> List[Optional[int]]:
        out: List[Optional[int]] = [None]
        for c in sorted({col_of[a] for a in all_ones}):
            if sum(1 for a in all_ones if col_of[a] == c) == 1:
                out.append(c)
        return out

    def _zone_choices(self, view: KnowledgeState, must: List[int],
                      surv_col: Optional[int]) -> List[Set[int]]:
        m = len(self.cols)
        p = max(self.p, 1)
        # split at cyclic gaps wider than the phase reach; always cut at
        # least once so no cluster wraps the whole ring
        gaps = [(must[(i + 1) % len(must)] - c) % m
                for i, c in enumerate(must)]
        cuts = [i for i, g in enumerate(gaps) if g > 2 * p + 1]
        if not cuts:
            cuts = [max(range(len(gaps)), key=gaps.__getitem__)]
        clusters: List[List[int]] = []
        for ci, cut in enumerate(cuts):
            run = []
            i = (cut + 1) % len(must)
            while True:
                run.append(must[i])
                if i == cuts[(ci + 1) % len(cuts)]:
                    break
                i = (i + 1) % len(must)
            clusters.append(run)
        margins = [(p, p - 1), (p - 1, p - 1), (p, p), (p - 1, p),
                   (p, p + 1), (p + 1, p), (p + 1, p + 1),
                   (p + 2, p + 2), (0, 0), (1, 1)]
        margins = list(dict.fromkeys((a, b) for a, b in margins
                                     if a >= 0 and b >= 0))
        if len(clusters) > 2:
            margins = [(p, p), (0, 0)]
        out: List[Set[int]] = []
        seen: Set[Tuple[int, ...]] = set()

        def expand(idx: int, acc: Set[int]) -> None:
            if idx == len(clusters):
                key = tuple(sorted(acc))
                if key in seen:
                    return
                seen.add(key)
                if surv_col is not None and surv_col in acc:
                    return
                if len(acc) >= m:
                    return
                agents = [a for c in acc for a in self.cols[c]]
                if any(view.known[a] == UNKNOWN for a in agents):
                    return
                out.append(set(acc))
                return
            lo, hi = clusters[idx][0], clusters[idx][-1]
            span = (hi - lo) % m
            for ml, mr in margins:
                zone = {(lo - 1 - t) % m for t in range(ml)}
                zone |= {(lo + t) % m for t in range(span + 1)}
                zone |= {(hi + 1 + t) % m for t in range(mr)}
                expand(idx + 1, acc | zone)

        expand(0, set())
        out.sort(key=lambda z: (len(z), tuple(sorted(z))))
        return out[:40]

    def _resume_choices(self, new_m: int) -> List[Tuple[int, int]]:
        out: List[Tuple[int, int]] = []
        mp = max_phase(new_m)
        if self.p <= mp:
            top = rounds_in_phase(new_m, self.p)
            for r2 in range(min(self.r, top), top + 1):
                out.append((self.p, r2))
        out.append((mp + 1, 0))
        return out

    def _est_rounds(self, new_m: int, p2: int, r2: int,
                    n_targets: int, probers: int) -> int:
        """Rounds left if this candidate is taken: probe catchup plus the
        rest of the schedule.  Post-discovery every round costs regret, so
        fewer rounds is the thing to optimise, not fewer replays."""
        rounds = 0
        if n_targets:
            rounds += -(-n_targets // max(probers, 1))
        for q in range(p2, max_phase(new_m) + 1):
            rounds += rounds_in_phase(new_m, q)
        if p2 <= max_phase(new_m):
            rounds -= r2
        return rounds

    def _execute_repair(self, view: KnowledgeState, oracle: _EdgeOracle,
                        cand) -> None:
        rank, zone, new_cols, resume, verdict, surv, removed_ones = cand
        removed_cols = tuple(self.cols[c] for c in sorted(zone))
        zeros = [a for c in zone for a in self.cols[c]
                 if view.known[a] == ZERO]
        self.locked_pairs += _pair_up(zeros)
        x = 0
        if surv is not None:
            x = sum(1 for v in removed_ones
                    if view.graph.label(surv, v) not in (None, 0))
        flags = []
        if verdict.cost:
            flags.append(f"replays:{verdict.cost}")
        self.events.append(RepairEvent(
            round_index=len(view.graph.rounds),
            case=f"phase{self.p}r{self.r}",
            removed_cols=removed_cols,
            z=len(zeros), w=len(removed_ones), x=x,
            resume=resume, targets=tuple(verdict.targets),
            flags=tuple(flags)))
        self.cols = list(new_cols)
        self.survivor = surv
        self.explorers = sorted(set(self.explorers) | set(removed_ones))
        self.pending = list(verdict.targets)
        self.p, self.r = resume
        self._bake(verdict.swaps)
        self.orients = verdict.orients
        if not self.pending:
            self._retire_explorers()

    def _retire_explorers(self) -> None:
        if self.explorers:
            self.locked_pairs += _pair_up(self.explorers)
            self.explorers = []

    # ---- play

    def next_matching(self, view: KnowledgeState) -> Matching:
        if self.locked is not None:
            return self.locked
        if all(view.known[a] != UNKNOWN for a in range(self.n)):
            ones = [a for a in range(self.n) if view.known[a] == ONE]
            zeros = [a for a in range(self.n) if view.known[a] == ZERO]
            pairs = []
            if len(ones) % 2:
                pairs.append(_pair(ones[-1], zeros[-1]))
                ones, zeros = ones[:-1], zeros[:-1]
            pairs += _pair_up(ones) + _pair_up(zeros)
            self.locked = canonical_matching(pairs)
            return self.locked
        oracle = _EdgeOracle(view)
        self._repair_attempt(view, oracle)

        if self.pending:
            ring = set(self._ring_agents())
            self.pending = [t for t in self.pending
                            if view.known[t] == UNKNOWN and t in ring]
            if self.pending:
                v = self._verify(oracle, self.cols, self.p, self.r,
                                 fixed_orients=self.orients or None)
                self.pending = v.targets
            if not self.pending:
                self._retire_explorers()

        if self.pending and self.explorers:
            return self._catchup_matching(view, oracle)

        self._advance_phase(oracle)
        m = len(self.cols)
        if not self.cols or self.p > max_phase(m):
            return self._complete_lock(view, oracle)
        pairs = self._scheduled_edges(self.p, self.r + 1)
        self.r += 1
        pairs += self.locked_pairs
        pairs += _pair_up(self.explorers)
        return canonical_matching(pairs)

    def _catchup_matching(self, view: KnowledgeState,
                          oracle: _EdgeOracle) -> Matching:
        """Probe pending targets while the rest of the ring plays on."""
        probes = list(zip(sorted(self.explorers), self.pending))
        probing = {t for _, t in probes}
        used = {z for z, _ in probes}
        idle = [e for e in self.explorers if e not in used]
        self._advance_phase(oracle)
        m = len(self.cols)
        if not self.cols or self.p > max_phase(m):
            ring = [a for a in self._ring_agents() if a not in probing]
            if len(ring) % 2:
                ring.append(idle.pop())
            scheduled = self._safe_pairing(ring, oracle)
        else:
            sched = self._scheduled_edges(self.p, self.r + 1)
            self.r += 1
            scheduled = [e for e in sched
                         if e[0] not in probing and e[1] not in probing]
            displaced = [a for e in sched for a in e
                         if ((e[0] in probing) != (e[1] in probing))
                         and a not in probing]
            if len(displaced) % 2:
                displaced.append(idle.pop())
            scheduled += _pair_up(displaced)
        pairs = [_pair(z, t) for z, t in probes]
        pairs += scheduled + self.locked_pairs + _pair_up(idle)
        return canonical_matching(pairs)

    def _safe_pairing(self, agents: List[int],
                      oracle: _EdgeOracle) -> List[Pair]:
        """Greedy pairing preferring free replays, then fresh edges."""
        left = sorted(agents)
        pairs: List[Pair] = []
        while left:
            a = left.pop(0)
            best_v, best_rank = None, None
            for v in left:
                if oracle.free(a, v):
                    rank = 0
                elif not oracle.played(a, v):
                    rank = 1
                else:
                    rank = 2
                if best_rank is None or rank < best_rank:
                    best_v, best_rank = v, rank
                    if rank == 0:
                        break
            left.remove(best_v)
            pairs.append(_pair(a, best_v))
        return pairs

    def _complete_lock(self, view: KnowledgeState,
                       oracle: _EdgeOracle) -> Matching:
        self._retire_explorers()
        ring = self._ring_agents()
        pairs = list(self.locked_pairs)
        ones = [a for a in ring if view.known[a] == ONE]
        rest = [a for a in ring if view.known[a] != ONE]
        if len(ones) % 2:
            rest = sorted(rest + ones[-1:])
            ones = ones[:-1]
        pairs += _pair_up(ones) + self._safe_pairing(rest, oracle)
        self.locked = canonical_matching(pairs)
        return self.locked


# -------------------------------------------------------------------- factory

POLICIES = {
    "uniform": FormUniformTeams,
    "diverse": FormDiverseTeams,
    "maxexploit": MaxExploit,
    "ring": RingWeaver,
    "naive": NaiveFactorization,
    "clique-first": CliqueFirstFactorization,
}


def make_policy(name: str, n: int) -> Policy:
    try:
        cls = POLICIES[name]
    except KeyError:
        raise ValueError(f"unknown policy {name!r}") from None
    return cls(n)
