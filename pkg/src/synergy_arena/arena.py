"""Game loop, termination detection, regret accounting, and trace checks.

A game alternates a policy (seeing only the k-blind view) with an
adversary (seeing everything) until an optimal matching is mutually
known.  Traces carry per-round knowledge snapshots and team-composition
counters so the accounting identities can be audited after the fact.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from .core import (Matching, Numeric, Synergy, canonical_matching,
                   check_perfect_matching, l_and, l_or, optimal_score,
                   regret_eq, regret_xor, round_regret, u_and, u_or)
from .exploration import KnowledgeState, observe, optimal_matching_known
from .policies import MaxExploit, Policy, make_policy
from .adversaries import Adversary, OutcomeVector, make_adversary

log = logging.getLogger(__name__)

EXPLICIT_LOCK_LIMIT = 20


@dataclass(frozen=True)
class RoundRecord:
    """One recorded round: the play, its regret, and what became known."""

    matching: Matching
    outcomes: OutcomeVector
    regret: Numeric
    zeros: Tuple[int, ...]
    ones: Tuple[int, ...]
    counters: Dict[str, Optional[int]]


@dataclass(frozen=True)
class Trace:
    """Full game record.

    zeros/ones snapshots and the d/e/delta counters use the k-blind view
    (what the rounds alone prove).  zz/zo/oo classify each round's teams
    under the completion labeling: the final knowledge extended by the
    smallest-encoded viable labeling, or None when the game ends with
    unknowns on a backend that cannot produce one.  diagnostics carries
    the adversary's quota/slack values and, for the probing policy, its
    conventional-knowledge counters.
    """

    n: int
    k: int
    synergy: str
    policy: str
    adversary: str
    rounds: Tuple[RoundRecord, ...]
    total_regret: Numeric
    rounds_to_lock: int
    locked: Optional[Matching]
    diagnostics: Dict[str, object] = field(default_factory=dict)


@dataclass(frozen=True)
class GameResult:
    trace: Trace
    locked: Optional[Matching]
    bounds: Dict[str, Optional[Numeric]]
    verdicts: Dict[str, bool]


def _completion(state: KnowledgeState) -> Optional[List[int]]:
    """A full labeling extending the final knowledge, if one is available."""
    n = state.n
    if state.is_explicit():
        v = min(int(x) for x in state.viable)
        return [(v >> i) & 1 for i in range(n)]
    if not state.unknowns():
        return [1 if t == 1 else 0 for t in state.known]
    return None


def _classify(m: Matching, lam: Optional[Sequence[int]]
              ) -> Tuple[Optional[int], Optional[int], Optional[int]]:
    if lam is None:
        return None, None, None
    zz = zo = oo = 0
    for u, v in m:
        s = lam[u] + lam[v]
        if s == 0:
            zz += 1
        elif s == 1:
            zo += 1
        else:
            oo += 1
    return zz, zo, oo


def _worst_score(state: KnowledgeState, m: Matching) -> Numeric:
    f = state.synergy
    worst = None
    for v in state.viable:
        lam = int(v)
        s = sum(f.apply((lam >> u) & 1, (lam >> v_) & 1) for u, v_ in m)
        if worst is None or s < worst:
            worst = s
    return worst


def run_game(policy: Policy, adversary: Adversary, n: int, k: int,
             synergy: Synergy, max_rounds: Optional[int] = None) -> GameResult:
    """Play one game to lock and return its trace and bound report.

    Lock detection is authoritative (exhaustive over viable labelings)
    up to n = 20 and falls back to the policy's own declaration above
    that, logging any disagreement between the two.  Exceeding
    max_rounds (default 2n) raises, reporting non-termination.
    """
    if n % 2:
        raise ValueError("n must be even")
    if not 0 <= k <= n:
        raise ValueError("k out of range")
    cap = max_rounds if max_rounds is not None else 2 * n
    if cap < n:
        raise ValueError("max_rounds must be at least n")
    explicit = n <= EXPLICIT_LOCK_LIMIT
    state = KnowledgeState.fresh(n, synergy, k=k, explicit=explicit)
    opt = optimal_score(n, k, synergy)

    rounds: List[dict] = []
    diagnostics: Dict[str, object] = {"lock_discrepancies": []}
    exploit_rounds: List[Dict[str, int]] = []
    conventional_zeros: List[Tuple[int, ...]] = []
    total = Fraction(0)
    view = state.policy_view()
    locked: Optional[Matching] = None

    for _ in range(cap):
        if explicit:
            mstar = optimal_matching_known(state)
            if mstar is not None:
                locked = mstar
                if (policy.locked is not None
                        and set(canonical_matching(policy.locked))
                        != set(mstar)
                        and _worst_score(state, policy.locked) != opt):
                    diagnostics["lock_discrepancies"].append(
                        {"round": len(rounds), "reason": "policy lock is "
                         "not optimal under every viable labeling"})
            elif policy.locked is not None:
                diagnostics["lock_discrepancies"].append(
                    {"round": len(rounds),
                     "reason": "policy locked before knowledge did"})
        elif policy.locked is not None:
            locked = canonical_matching(policy.locked)
        if locked is not None:
            break

        m = policy.next_matching(view)
        check_perfect_matching(m, n)
        if isinstance(policy, MaxExploit):
            conventional_zeros.append(tuple(sorted(policy.k0)))
        pre_z, pre_o = set(view.known_zeros()), set(view.known_ones())
        outs = adversary.respond(state, m)
        r = round_regret(m, outs, n, k, synergy)
        state = observe(state, m, outs)
        view = state.policy_view()
        post_z, post_o = set(view.known_zeros()), set(view.known_ones())
        partner: Dict[int, int] = {}
        for u, v in m:
            partner[u], partner[v] = v, u
        new_z = post_z - pre_z
        d = sum(1 for x in new_z
                if partner[x] not in pre_z and partner[x] not in pre_o)
        e = sum(1 for x in new_z if partner[x] in pre_z)
        total += Fraction(r)
        rounds.append({
            "matching": m, "outcomes": outs, "regret": r,
            "zeros": tuple(sorted(post_z)), "ones": tuple(sorted(post_o)),
            "d": d, "e": e, "delta": len(post_z) - len(post_o)})
    else:
        raise RuntimeError(
            f"no optimal matching locked within {cap} rounds "
            f"(n={n}, k={k}, {synergy.kind}, {policy.name} vs "
            f"{adversary.kind})")

    lam = _completion(state)
    if isinstance(policy, MaxExploit):
        policy.next_matching(view)  # flush bookkeeping for the last round
        for t, c in enumerate(policy.counters[:len(rounds)]):
            probes = sum(1 for kind, _ in policy.planned[t]
                         if kind == "probe")
            exploit_rounds.append({"d": c.discovered, "e": c.explored,
                                   "delta": c.delta, "probes": probes})
        diagnostics["exploit_rounds"] = exploit_rounds
        diagnostics["conventional_zeros"] = conventional_zeros
    diagnostics["adversary"] = dict(adversary.diagnostics)

    records = []
    for rec in rounds:
        zz, zo, oo = _classify(rec["matching"], lam)
        records.append(RoundRecord(
            matching=rec["matching"], outcomes=rec["outcomes"],
            regret=rec["regret"], zeros=rec["zeros"], ones=rec["ones"],
            counters={"d": rec["d"], "e": rec["e"], "delta": rec["delta"],
                      "zz": zz, "zo": zo, "oo": oo}))
    trace = Trace(n=n, k=k, synergy=synergy.kind, policy=policy.name,
                  adversary=adversary.kind, rounds=tuple(records),
                  total_regret=total if total.denominator != 1
                  else int(total),
                  rounds_to_lock=len(records), locked=locked,
                  diagnostics=diagnostics)
    bounds = _bounds(n, k, synergy)
    verdicts = {}
    if bounds["lower"] is not None:
        verdicts["ge_lower"] = Fraction(total) >= Fraction(bounds["lower"])
    if bounds["upper"] is not None:
        verdicts["le_upper"] = Fraction(total) <= Fraction(bounds["upper"])
    return GameResult(trace=trace, locked=locked, bounds=bounds,
                      verdicts=verdicts)


def _bounds(n: int, k: int,
            synergy: Synergy) -> Dict[str, Optional[Numeric]]:
    kind = synergy.kind
    if kind == "EQ":
        v = regret_eq(n, k)
        return {"lower": v, "upper": v}
    if kind == "XOR":
        v = regret_xor(n, k)
        return {"lower": v, "upper": v}
    if kind == "AND":
        return {"lower": l_and(n, k), "upper": u_and(n, k)}
    if kind == "OR":
        a = Fraction(n - k, n)
        return {"lower": l_or(a) * n, "upper": u_or(a) * n}
    return {"lower": None, "upper": None}


def check_trace_invariants(trace: Trace) -> List[str]:
    """Audit a completed trace; returns human-readable violations.

    Always: totals add up, per-round regret is nonnegative, and (when the
    completion labeling exists) the team-composition counters cover all
    teams and satisfy the regime identities.  On traces of the probing
    policy for the either-type synergy: the knowledge-surplus recurrence
    (surplus never grows; a round that probes exactly the previous
    surplus satisfies delta = 2e), no pairing of two conventionally
    known Zeros while alpha <= 1/2, and the round-1 (0,0)-team count
    exceeding alpha*n/5 whenever rounds 2+ reveal Zeros by probing only
    and the probing left the round-3 survivors in intact 4-cliques.
    """
    v: List[str] = []
    n, k = trace.n, trace.k
    if sum(Fraction(r.regret) for r in trace.rounds) != trace.total_regret:
        v.append("total regret does not equal the sum of round regrets")
    for t, r in enumerate(trace.rounds, 1):
        if r.regret < 0:
            v.append(f"round {t}: negative regret {r.regret}")
    have_counts = trace.rounds and all(
        r.counters.get("zz") is not None for r in trace.rounds)
    if have_counts:
        for t, r in enumerate(trace.rounds, 1):
            zz, zo, oo = (r.counters["zz"], r.counters["zo"],
                          r.counters["oo"])
            if zz + zo + oo != n // 2:
                v.append(f"round {t}: team classification covers "
                         f"{zz + zo + oo} teams, expected {n // 2}")
                continue
            if 2 * k < n:  # alpha > 1/2
                if zo != k - 2 * oo:
                    v.append(f"round {t}: zo={zo} breaks zo=(1-a)n-2oo")
                if 2 * zz != 2 * oo + (n - 2 * k):
                    v.append(f"round {t}: zz={zz} breaks zz=oo+(a-1/2)n")
            if trace.synergy == "OR":
                want = zz if 2 * k >= n else oo
                if r.regret != want:
                    v.append(f"round {t}: regret {r.regret} != "
                             f"{'zz' if 2 * k >= n else 'oo'}={want}")
            if trace.synergy == "AND" and k % 2 == 0:
                if 2 * r.regret != zo:
                    v.append(f"round {t}: regret {r.regret} != zo/2")
    ex = trace.diagnostics.get("exploit_rounds")
    if ex and trace.synergy == "OR":
        if ex[0]["delta"] != ex[0]["d"]:
            v.append("round 1: surplus differs from discovered Zeros")
        for t in range(1, len(ex)):
            if ex[t]["delta"] > ex[t - 1]["delta"]:
                v.append(f"round {t + 1}: knowledge surplus grew")
            if (ex[t]["probes"] and ex[t]["probes"] == ex[t - 1]["delta"]
                    and ex[t]["delta"] != 2 * ex[t]["e"]):
                v.append(f"round {t + 1}: saturated probing broke "
                         "delta = 2e")
        # the round-1 (0,0) floor needs the round-3 survivors to sit in
        # intact 4-cliques: probing must consume whole teams in round 2
        # and whole 4-cycles in round 3, and the round-2 re-pair must
        # have an even team count (an odd count repeats one team, which
        # stays a 2-clique and weakens the floor to exact equality)
        if (2 * k < n and len(ex) >= 3
                and all(row["d"] == 0 for row in ex[1:])):
            zz1 = ex[0]["d"] // 2
            p2, p3 = ex[1]["probes"], ex[2]["probes"]
            teams2 = n // 2 - zz1 - p2 // 2
            if (p2 % 2 == 0 and p3 % 4 == 0 and teams2 % 2 == 0
                    and 5 * zz1 <= n - k):
                v.append(f"round 1: zz={zz1} not above alpha*n/5")
    zero_sets = trace.diagnostics.get("conventional_zeros")
    if (zero_sets and trace.synergy == "OR" and 2 * k >= n):
        for t, (r, zeros) in enumerate(zip(trace.rounds, zero_sets), 1):
            zs = set(zeros)
            for a, b in r.matching:
                if a in zs and b in zs:
                    v.append(f"round {t}: paired two known Zeros "
                             f"({a},{b})")
    return v


# ------------------------------------------------------------ serialization

def _plain(x):
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else str(x)
    if isinstance(x, dict):
        return {str(k): _plain(val) for k, val in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(val) for val in x]
    if isinstance(x, (set, frozenset)):
        return sorted(_plain(val) for val in x)
    return x


def trace_json(trace: Trace) -> str:
    """The trace as a JSON document: {meta, rounds, totals}."""
    doc = {
        "meta": {
            "n": trace.n, "k": trace.k,
            "alpha": str(Fraction(trace.n - trace.k, trace.n)),
            "synergy": trace.synergy, "policy": trace.policy,
            "adversary": trace.adversary,
            "locked": _plain(trace.locked),
            "diagnostics": _plain(trace.diagnostics)},
        "rounds": [{
            "matching": [[u, v] for u, v in r.matching],
            "outcomes": _plain(r.outcomes),
            "regret": _plain(r.regret),
            "known": {"zeros": list(r.zeros), "ones": list(r.ones)},
            "counters": _plain(r.counters)} for r in trace.rounds],
        "totals": {"regret": _plain(trace.total_regret),
                   "rounds_to_lock": trace.rounds_to_lock}}
    return json.dumps(doc, indent=2)


# ------------------------------------------------------------------- sweeps

K_RULES: Dict[str, Callable[[int], Iterable[int]]] = {
    "all": lambda n: range(n + 1),
    "even": lambda n: range(2, n - 1, 2),
    "odd": lambda n: range(1, n, 2),
    "half": lambda n: (n // 2,),
}


def _resolve_k_rule(k_rule) -> Callable[[int], Iterable[int]]:
    if callable(k_rule):
        return k_rule
    if isinstance(k_rule, int):
        return lambda n: (k_rule,)
    try:
        return K_RULES[k_rule]
    except KeyError:
        raise ValueError(f"unknown k rule {k_rule!r}") from None


def sweep(policy: str, adversary: str, n_range: Iterable[int], k_rule,
          synergy: Synergy, max_rounds: Optional[int] = None,
          threads: Optional[int] = None) -> str:
    """Grid of games as CSV; a failing cell drops its row, not the sweep.

    threads defaults to the SYNERGY_ARENA_THREADS environment variable
    (cells are independent games, so parallel order never shows in the
    output, which stays sorted by grid position).
    """
    rule = _resolve_k_rule(k_rule)
    cells = [(n, k) for n in n_range for k in rule(n)]
    if threads is None:
        threads = int(os.environ.get("SYNERGY_ARENA_THREADS", "1") or 1)

    def one(cell):
        n, k = cell
        try:
            res = run_game(make_policy(policy, n), make_adversary(adversary, k),
                           n, k, synergy, max_rounds=max_rounds)
        except Exception as exc:
            log.warning("sweep cell n=%d k=%d aborted: %s", n, k, exc)
            return None
        t = res.trace
        a = Fraction(n - k, n)
        return [n, k, float(a), t.synergy, t.policy, t.adversary,
                _plain(t.total_regret),
                "" if res.bounds["lower"] is None
                else float(res.bounds["lower"]),
                "" if res.bounds["upper"] is None
                else float(res.bounds["upper"]),
                t.rounds_to_lock]

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, cells))
    else:
        rows = [one(c) for c in cells]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "k", "alpha", "synergy", "policy", "adversary",
                "regret", "lower", "upper", "rounds_to_lock"])
    for row in rows:
        if row is not None:
            w.writerow(row)
    return buf.getvalue()
