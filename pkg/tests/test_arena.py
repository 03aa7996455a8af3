"""Game-loop behavior: frozen examples, trace audits, sweeps, serialization."""

import csv
import io
import json
import random

import pytest

from synergy_arena import (AND, EQ, OR, XOR, GameResult, RoundRecord, Trace,
                           check_trace_invariants, l_and, make_adversary,
                           make_policy, regret_eq, run_game, sweep,
                           trace_json, u_and)
from synergy_arena.adversaries import Adversary
from synergy_arena.arena import K_RULES


def game(policy, adversary, n, k, synergy, **kw):
    return run_game(make_policy(policy, n), make_adversary(adversary, k),
                    n, k, synergy, **kw)


class FixedTypes(Adversary):
    """Truthful opponent with a committed labeling; test scaffolding."""

    kind = "fixed"

    def __init__(self, types):
        super().__init__(k=sum(types))
        self.types = tuple(types)

    def respond(self, state, m):
        self._guard(state, m, None)
        f = state.synergy
        return tuple(f.apply(self.types[u], self.types[v]) for u, v in m)


# ----------------------------------------------------------- frozen games

def test_uniform_vs_eq_bipartite_example():
    res = game("uniform", "eq-bipartite", 10, 4, EQ)
    assert res.trace.total_regret == 8
    assert res.trace.rounds_to_lock <= 3
    assert res.locked is not None
    assert res.verdicts == {"ge_lower": True, "le_upper": True}


def test_ring_vs_and_greedy_example():
    res = game("ring", "and-greedy", 10, 4, AND)
    assert 6 <= res.trace.total_regret <= 7


def test_maxexploit_vs_exact_adversary_example():
    res = game("maxexploit", "greedy:inf", 6, 2, OR)
    assert res.trace.total_regret == 1


def test_diverse_vs_xor_cycle_matches_closed_form():
    res = game("diverse", "xor-cycle", 8, 4, XOR)
    assert res.trace.total_regret == 6
    assert res.bounds["lower"] == res.bounds["upper"] == 6


# ------------------------------------------------------------- run_game API

def test_run_game_rejects_odd_n():
    with pytest.raises(ValueError):
        game("uniform", "eq-bipartite", 7, 2, EQ)


def test_run_game_rejects_small_round_cap():
    with pytest.raises(ValueError):
        game("uniform", "eq-bipartite", 8, 2, EQ, max_rounds=4)


def test_run_game_reports_nontermination():
    # a fixed factorization schedule never declares a lock, and above the
    # exhaustive-lock size nothing else can end the game
    with pytest.raises(RuntimeError, match="no optimal matching"):
        game("naive", "and-greedy", 22, 4, AND, max_rounds=22)


def test_post_lock_rounds_are_not_recorded():
    res = game("uniform", "eq-bipartite", 10, 4, EQ, max_rounds=50)
    assert res.trace.rounds_to_lock == len(res.trace.rounds)
    assert res.trace.rounds_to_lock <= 3


def test_lock_bookkeeping_is_clean_on_ordinary_runs():
    res = game("uniform", "eq-bipartite", 8, 2, EQ)
    assert res.trace.diagnostics["lock_discrepancies"] == []


@pytest.mark.parametrize("policy,adversary,synergy,k", [
    ("uniform", "eq-bipartite", EQ, 4),
    ("diverse", "xor-cycle", XOR, 4),
    ("ring", "and-greedy", AND, 4),
    ("maxexploit", "or-best", OR, 4),
])
def test_termination_within_n_rounds(policy, adversary, synergy, k):
    for n in (8, 10, 12):
        res = game(policy, adversary, n, k, synergy)
        assert res.trace.rounds_to_lock <= n


def test_locked_matching_is_canonical_and_perfect():
    res = game("maxexploit", "or-best", 10, 4, OR)
    m = res.locked
    assert m == tuple(sorted(tuple(sorted(p)) for p in m))
    assert sorted(x for p in m for x in p) == list(range(10))


# ------------------------------------------------------------ trace audits

def test_maxexploit_traces_audit_clean():
    rng = random.Random(7)
    for n in (10, 12, 26, 40, 50):
        k = rng.randrange(1, n)
        for adv in ("or-best", "or-lb2"):
            res = game("maxexploit", adv, n, k, OR)
            assert check_trace_invariants(res.trace) == [], (n, k, adv)


def test_audit_flags_pairing_two_known_zeros():
    rounds = (
        RoundRecord(matching=((0, 1), (2, 3), (4, 5)), outcomes=(0, 1, 1),
                    regret=0, zeros=(0, 1), ones=(),
                    counters={"d": 2, "e": 0, "delta": 2,
                              "zz": None, "zo": None, "oo": None}),
        RoundRecord(matching=((0, 1), (2, 4), (3, 5)), outcomes=(0, 1, 1),
                    regret=0, zeros=(0, 1), ones=(),
                    counters={"d": 0, "e": 0, "delta": 2,
                              "zz": None, "zo": None, "oo": None}),
    )
    trace = Trace(n=6, k=4, synergy="OR", policy="maxexploit",
                  adversary="hand-built", rounds=rounds, total_regret=0,
                  rounds_to_lock=2, locked=None,
                  diagnostics={"conventional_zeros": [(), (0, 1)]})
    violations = check_trace_invariants(trace)
    assert len(violations) == 1
    assert "paired two known Zeros" in violations[0]


def test_audit_flags_broken_composition_identity():
    rounds = (
        RoundRecord(matching=((0, 1), (2, 3)), outcomes=(0, 1), regret=1,
                    zeros=(0, 1), ones=(),
                    counters={"d": 2, "e": 0, "delta": 2,
                              "zz": 1, "zo": 0, "oo": 1}),
    )
    # n=4, k=1, alpha=3/4: zo should be k-2*oo = -1 != 0 is impossible,
    # so use counts that cover the teams but break zz = oo + (a-1/2)n
    trace = Trace(n=4, k=1, synergy="OR", policy="maxexploit",
                  adversary="hand-built", rounds=rounds, total_regret=1,
                  rounds_to_lock=1, locked=None, diagnostics={})
    violations = check_trace_invariants(trace)
    assert any("zo" in v or "zz" in v for v in violations)


def test_audit_flags_total_mismatch():
    rounds = (
        RoundRecord(matching=((0, 1), (2, 3)), outcomes=(1, 1), regret=1,
                    zeros=(), ones=(),
                    counters={"d": 0, "e": 0, "delta": 0,
                              "zz": None, "zo": None, "oo": None}),
    )
    trace = Trace(n=4, k=2, synergy="EQ", policy="uniform",
                  adversary="hand-built", rounds=rounds, total_regret=5,
                  rounds_to_lock=1, locked=None, diagnostics={})
    assert any("total regret" in v for v in check_trace_invariants(trace))


def test_and_trace_regret_is_half_the_mixed_team_count():
    res = game("ring", "and-greedy", 12, 4, AND)
    t = res.trace
    assert check_trace_invariants(t) == []
    mixed = sum(r.counters["zo"] for r in t.rounds)
    assert t.total_regret * 2 == mixed


def test_eq_trace_counters_cover_all_teams():
    res = game("uniform", "eq-bipartite", 10, 4, EQ)
    for r in res.trace.rounds:
        assert r.counters["zz"] + r.counters["zo"] + r.counters["oo"] == 5


def test_round_snapshots_grow_monotonically():
    res = game("maxexploit", "or-lb3", 16, 7, OR)
    prev_z, prev_o = set(), set()
    for r in res.trace.rounds:
        assert prev_z <= set(r.zeros) and prev_o <= set(r.ones)
        prev_z, prev_o = set(r.zeros), set(r.ones)


# ------------------------------------------- regret decomposition (alpha>1/2)

def decomposition(zz1, zo1, oo1):
    return (zo1 + oo1) // zz1 * oo1 + min(oo1, (zo1 + oo1) % zz1)


@pytest.mark.parametrize("ones,zz1,zo1,oo1", [
    # lex round-1 teams make (0,1),(2,3),... so type placement pins the
    # first-round composition; quotas chosen integral with alpha > 1/2
    ((7, 9, 11, 13, 14, 15), 3, 4, 1),
    ((9, 11, 12, 13, 14, 15), 4, 2, 2),
])
def test_maxexploit_matches_regret_decomposition(ones, zz1, zo1, oo1):
    n = 16
    types = [1 if i in ones else 0 for i in range(n)]
    adv = FixedTypes(types)
    res = run_game(make_policy("maxexploit", n), adv, n, adv.k, OR)
    t = res.trace
    c1 = t.rounds[0].counters
    assert (c1["zz"], c1["zo"], c1["oo"]) == (zz1, zo1, oo1)
    assert t.total_regret == decomposition(zz1, zo1, oo1)
    assert check_trace_invariants(t) == []


def test_zz_floor_applies_on_clean_probe_only_runs():
    res = game("maxexploit", "or-lb1", 34, 16, OR)
    ex = res.trace.diagnostics["exploit_rounds"]
    assert len(ex) >= 3
    assert all(row["d"] == 0 for row in ex[1:])
    assert ex[1]["probes"] % 2 == 0 and ex[2]["probes"] % 4 == 0
    zz1 = ex[0]["d"] // 2
    assert (34 // 2 - zz1 - ex[1]["probes"] // 2) % 2 == 0
    assert 5 * zz1 > 34 - 16
    assert check_trace_invariants(res.trace) == []


def test_zz_floor_skips_odd_repair_runs():
    # 11 pending teams at the round-2 re-pair: one team is repeated and
    # stays a 2-clique, so the strict floor legitimately lands on equality
    res = game("maxexploit", "or-lb1", 38, 18, OR)
    ex = res.trace.diagnostics["exploit_rounds"]
    zz1 = ex[0]["d"] // 2
    assert 5 * zz1 == 38 - 18
    assert (38 // 2 - zz1 - ex[1]["probes"] // 2) % 2 == 1
    assert check_trace_invariants(res.trace) == []


# ------------------------------------------------------------ serialization

def test_trace_json_shape_and_determinism():
    a = game("maxexploit", "or-best", 10, 4, OR)
    b = game("maxexploit", "or-best", 10, 4, OR)
    ja, jb = trace_json(a.trace), trace_json(b.trace)
    assert ja == jb
    doc = json.loads(ja)
    assert set(doc) == {"meta", "rounds", "totals"}
    assert doc["meta"]["alpha"] == "3/5"
    assert doc["totals"]["regret"] == a.trace.total_regret
    assert doc["totals"]["rounds_to_lock"] == a.trace.rounds_to_lock
    for rnd in doc["rounds"]:
        assert set(rnd) == {"matching", "outcomes", "regret", "known",
                            "counters"}
        assert set(rnd["counters"]) == {"d", "e", "delta", "zz", "zo", "oo"}
        assert set(rnd["known"]) == {"zeros", "ones"}


def test_trace_json_carries_adversary_quotas():
    res = game("maxexploit", "or-lb1", 34, 17, OR)
    doc = json.loads(trace_json(res.trace))
    adv = doc["meta"]["diagnostics"]["adversary"]
    assert adv["script"] == "LB1"
    assert adv["beta"] == "2/17"
    assert adv["gamma"] == "2/17"
    assert res.trace.total_regret == 13


# ------------------------------------------------------------------- sweeps

def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_and_sweep_rows_sit_in_the_sandwich():
    text = sweep("ring", "and-greedy", range(6, 21, 2), "even", AND)
    rows = rows_of(text)
    assert len(rows) == sum(len(range(2, n - 1, 2)) for n in range(6, 21, 2))
    for row in rows:
        n, k, regret = int(row["n"]), int(row["k"]), int(row["regret"])
        assert l_and(n, k) <= regret <= u_and(n, k), row
        assert float(row["lower"]) == l_and(n, k)
        assert float(row["upper"]) == u_and(n, k)


def test_or_sweep_vs_half_pairs_floor():
    text = sweep("maxexploit", "or-lb2", range(10, 17, 2),
                 lambda n: range(2, 2 * n // 5), OR)
    for row in rows_of(text):
        assert int(row["regret"]) >= int(row["k"]) // 2, row


def test_eq_sweep_vs_exact_adversary_is_tight():
    text = sweep("uniform", "greedy:inf", (4, 6, 8), "all", EQ)
    rows = rows_of(text)
    assert rows
    for row in rows:
        assert int(row["regret"]) == regret_eq(int(row["n"]), int(row["k"]))


def test_sweep_aborts_failing_rows_only():
    # the exact adversary refuses n=16 (solver cap), so that row vanishes
    text = sweep("uniform", "greedy:2", (4, 16), lambda n: (2,), EQ)
    rows = rows_of(text)
    assert [(r["n"], r["k"]) for r in rows] == [("4", "2")]


def test_sweep_threads_preserve_output():
    serial = sweep("uniform", "eq-bipartite", (6, 8, 10), "half", EQ,
                   threads=1)
    parallel = sweep("uniform", "eq-bipartite", (6, 8, 10), "half", EQ,
                     threads=4)
    assert serial == parallel


def test_sweep_k_rules():
    assert list(K_RULES["even"](8)) == [2, 4, 6]
    assert list(K_RULES["odd"](8)) == [1, 3, 5, 7]
    assert list(K_RULES["all"](4)) == [0, 1, 2, 3, 4]
    assert list(K_RULES["half"](8)) == [4]
    with pytest.raises(ValueError):
        sweep("uniform", "eq-bipartite", (6,), "fibonacci", EQ)


def test_sweep_csv_header():
    text = sweep("uniform", "eq-bipartite", (6,), 2, EQ)
    assert text.splitlines()[0] == ("n,k,alpha,synergy,policy,adversary,"
                                    "regret,lower,upper,rounds_to_lock")
