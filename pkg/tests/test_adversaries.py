"""Adversary tests.

Closed-form regret oracles (regret_eq, regret_xor, the OR quota pieces on
divisible instances, the n-k bound for the both-types opponent) are frozen
first; plays then drive policy vs adversary with the policy seeing only
its k-blind view, mirroring how the arena runs a game.
"""

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from synergy_arena.core import (AND, EQ, OR, XOR, canonical_matching, l_and,
                                regret_eq, regret_xor, round_regret, u_and)
from synergy_arena.exploration import (KnowledgeState, observe,
                                       optimal_matching_known)
from synergy_arena.policies import (CliqueFirstFactorization,
                                    FormDiverseTeams, FormUniformTeams,
                                    MaxExploit, NaiveFactorization,
                                    RingWeaver, lex_matching)
from synergy_arena.adversaries import (AndGreedy, EqBipartite,
                                       GreedyMaxRegret, OrScripted, XorCycle,
                                       and_greedy_step, greedy_max_regret,
                                       make_adversary, minimal_revealable_set,
                                       or_scripted_step)


def play(policy, adv, n, k, f, cap=None, explicit=True, lock_check=True):
    """Drive one game; returns (total regret, per-round regrets, rounds)."""
    state = KnowledgeState.fresh(n, f, k=k if explicit else None,
                                 explicit=explicit)
    total = Fraction(0)
    per = []
    rounds = 0
    for _ in range(cap or 2 * n):
        if lock_check and optimal_matching_known(state) is not None:
            break
        m = policy.next_matching(state.policy_view())
        outs = adv.respond(state, m)
        r = Fraction(round_regret(m, outs, n, k, f))
        total += r
        per.append(r)
        state = observe(state, m, outs)
        rounds += 1
    return total, per, rounds


class RandomMatching:
    """Fuzzing driver: a uniformly shuffled pairing each round."""

    def __init__(self, n, seed):
        self.n = n
        self.rng = random.Random(seed)

    def next_matching(self, view):
        agents = list(range(self.n))
        self.rng.shuffle(agents)
        return canonical_matching(list(zip(agents[::2], agents[1::2])))


# --------------------------------------------------------------- same-types

@pytest.mark.parametrize("n", [4, 6, 8, 10, 12])
def test_eq_bipartite_exact_against_uniform_teams(n):
    for k in range(n + 1):
        total, _, _ = play(FormUniformTeams(n), EqBipartite(k), n, k, EQ)
        assert total == regret_eq(n, k), (n, k)


def test_eq_bipartite_round_one_fails_minority_count():
    state = KnowledgeState.fresh(10, EQ, k=4, explicit=True)
    outs = EqBipartite(4).respond(state, lex_matching(10))
    assert outs.count(0) == 4 and outs.count(1) == 1


def test_eq_bipartite_rejects_foreign_history():
    state = KnowledgeState.fresh(6, EQ, k=2, explicit=True)
    state = observe(state, lex_matching(6), (1, 1, 1))
    m2 = canonical_matching([(0, 2), (1, 3), (4, 5)])
    with pytest.raises(ValueError):
        EqBipartite(2).respond(state, m2)


# ---------------------------------------------------------------- mix-types

@pytest.mark.parametrize("n", [4, 6, 8, 10, 12])
def test_xor_cycle_exact_against_diverse_teams(n):
    for k in range(n + 1):
        total, _, _ = play(FormDiverseTeams(n), XorCycle(k), n, k, XOR)
        assert total == regret_xor(n, k), (n, k)


def test_xor_cycle_round_two_success_cap():
    state = KnowledgeState.fresh(8, XOR, k=4, explicit=True)
    m1 = lex_matching(8)
    o1 = XorCycle(4).respond(state, m1)
    assert o1 == (0, 0, 0, 0)
    state = observe(state, m1, o1)
    adv = XorCycle(4)
    m2 = canonical_matching([(0, 2), (1, 3), (4, 6), (5, 7)])
    o2 = adv.respond(state, m2)
    assert sum(o2) <= 2


# --------------------------------------------------------------- both-types

def test_and_greedy_first_two_rounds_all_fail():
    state = KnowledgeState.fresh(10, AND, k=4, explicit=True)
    adv = AndGreedy(4)
    m1 = lex_matching(10)
    o1 = adv.respond(state, m1)
    assert set(o1) == {0}
    state = observe(state, m1, o1)
    m2 = canonical_matching([(0, 2), (1, 3), (4, 6), (5, 7), (8, 9)])
    o2 = adv.respond(state, m2)
    assert set(o2) == {0}


@pytest.mark.parametrize("n", [6, 8, 10])
@pytest.mark.parametrize("mk", [NaiveFactorization, CliqueFirstFactorization,
                                RingWeaver])
def test_and_greedy_meets_zero_one_bound(n, mk):
    for k in range(2, n - 1, 2):
        total, _, _ = play(mk(n), AndGreedy(k), n, k, AND)
        assert total >= n - k, (n, k)


def test_and_greedy_vs_ring_inside_sandwich():
    total, _, _ = play(RingWeaver(12), AndGreedy(4), 12, 4, AND)
    assert l_and(12, 4) <= total <= u_and(12, 4)
    assert total == 8


def test_minimal_revealable_set_empty_graph_is_empty():
    state = KnowledgeState.fresh(8, AND, k=3, explicit=True)
    m = lex_matching(8)
    rs = minimal_revealable_set(state, m, 3)
    assert rs.edges == ()
    assert sum(rs.witness) == 3
    assert all(rs.witness[u] * rs.witness[v] == 0 for u, v in m)


def test_minimal_revealable_set_whole_matching_when_all_ones():
    # k = n leaves no failing labeling, so every team must be revealed
    state = KnowledgeState.fresh(4, AND, k=4, explicit=False,
                                 counting_rule=False)
    rs = minimal_revealable_set(state, lex_matching(4), 4)
    assert rs.edges == ((0, 1), (2, 3))
    assert rs.witness == (1, 1, 1, 1)


def _six_cycle_state():
    state = KnowledgeState.fresh(8, AND, k=4, explicit=True)
    m1 = canonical_matching([(0, 1), (2, 3), (4, 5), (6, 7)])
    m2 = canonical_matching([(1, 2), (3, 4), (0, 5), (6, 7)])
    state = observe(state, m1, (0, 0, 0, 0))
    state = observe(state, m2, (0, 0, 0, 0))
    return state


def test_minimal_revealable_set_after_six_cycle_of_failures():
    state = _six_cycle_state()
    m3 = canonical_matching([(0, 2), (1, 3), (4, 6), (5, 7)])
    rs = minimal_revealable_set(state, m3, 4)
    assert rs.edges == ((0, 2),)
    assert rs.witness[0] == rs.witness[2] == 1
    assert sum(rs.witness) == 4


def test_and_greedy_step_matches_respond():
    state = _six_cycle_state()
    m3 = canonical_matching([(0, 2), (1, 3), (4, 6), (5, 7)])
    step = and_greedy_step(state, m3, 4)
    assert step.reveals == ()
    assert step.reveal_set.edges == ((0, 2),)
    assert step.outcomes == AndGreedy(4).respond(state, m3)
    assert step.outcomes[m3.index((0, 2))] == 1


def test_and_greedy_reveals_explored_agents_eventually():
    # k > n/2 forces a 1-edge in round 1, so round 2 explores known Ones
    pol = CliqueFirstFactorization(8)
    state = KnowledgeState.fresh(8, AND, k=5, explicit=True)
    adv = AndGreedy(5)
    saw_reveal = False
    for _ in range(16):
        if optimal_matching_known(state) is not None:
            break
        m = pol.next_matching(state.policy_view())
        step = and_greedy_step(state, m, 5)
        assert step.outcomes == adv.respond(state, m)
        if step.reveals and not saw_reveal:
            saw_reveal = True
            ones = set(state.known_ones())
            partner = {}
            for u, v in canonical_matching(m):
                partner[u], partner[v] = v, u
            first, _ = step.reveals[0]
            assert partner[first] in ones
        state = observe(state, m, step.outcomes)
    assert saw_reveal


def _graph_neighbors(graph, x):
    out = set()
    for u, v in graph.edges:
        if u == x:
            out.add(v)
        elif v == x:
            out.add(u)
    return out


def _labelings(state):
    n = state.n
    for v in state.viable:
        yield [(int(v) >> i) & 1 for i in range(n)]


@pytest.mark.parametrize("n,ks", [(8, (2, 3, 4, 5, 6)), (10, (3, 4, 6))])
@pytest.mark.parametrize("mk", [NaiveFactorization, CliqueFirstFactorization,
                                RingWeaver, MaxExploit])
def test_and_greedy_connectivity_lemmas(n, ks, mk):
    """Every discovered 0-agent has >= 2 One neighbors in every viable
    labeling; right after the first revealed 1-edge, every undiscovered
    0-agent has an undiscovered 1-agent neighbor in every viable labeling."""
    for k in ks:
        pol = mk(n)
        state = KnowledgeState.fresh(n, AND, k=k, explicit=True)
        adv = AndGreedy(k)
        first_one_checked = False
        for _ in range(2 * n):
            if optimal_matching_known(state) is not None:
                break
            m = pol.next_matching(state.policy_view())
            outs = adv.respond(state, m)
            prev_zeros = set(state.known_zeros())
            state = observe(state, m, outs)
            for w in set(state.known_zeros()) - prev_zeros:
                nb = _graph_neighbors(state.graph, w)
                for lam in _labelings(state):
                    assert sum(lam[y] for y in nb) >= 2, (n, k, w)
            if not first_one_checked and any(o == 1 for o in outs):
                first_one_checked = True
                kz = set(state.known_zeros())
                ko = set(state.known_ones())
                for lam in _labelings(state):
                    for x in range(n):
                        if lam[x] == 0 and x not in kz:
                            nb = _graph_neighbors(state.graph, x)
                            assert any(lam[y] == 1 and y not in ko
                                       for y in nb), (n, k, x)


# ----------------------------------------------------------- either-type

@pytest.mark.parametrize("n,k", [(10, 2), (12, 4), (14, 5)])
def test_or_lb2_half_k_in_its_regime(n, k):
    # alpha > 3/5, where the offline optimum is k and round 1 realizes it
    total, _, _ = play(MaxExploit(n), OrScripted(k, "LB2"), n, k, OR)
    assert total >= k // 2


def test_or_lb1_divisible_instance_vs_maxexploit():
    total, per, _ = play(MaxExploit(34), OrScripted(17, "LB1"), 34, 17, OR,
                         cap=12, explicit=False, lock_check=False)
    assert total >= 13  # 13/17 * alpha * n at alpha = 1/2
    assert total == 13
    assert per[0] == 4


@pytest.mark.parametrize("n,k,want", [(10, 4, 2), (16, 7, 4)])
def test_or_lb3_exact_quota(n, k, want):
    total, _, _ = play(MaxExploit(n), OrScripted(k, "LB3"), n, k, OR)
    assert total == want


@pytest.mark.parametrize("n,k,want", [(22, 10, 6), (44, 20, 12)])
def test_or_lb4_exact_quota(n, k, want):
    total, _, _ = play(MaxExploit(n), OrScripted(k, "LB4"), n, k, OR,
                       cap=10, explicit=False, lock_check=False)
    assert total == want


@pytest.mark.parametrize("n,k,floor_", [(34, 17, 13), (22, 10, 6),
                                        (16, 7, 4), (10, 2, 1)])
def test_or_best_matches_regime_bound(n, k, floor_):
    big = n > 16
    total, _, _ = play(MaxExploit(n), OrScripted(k, "BEST"), n, k, OR,
                       cap=12 if big else None, explicit=not big,
                       lock_check=not big)
    assert total >= floor_


def test_or_scripted_step_replays_history():
    pol = MaxExploit(10)
    driver = OrScripted(4, "LB3")
    state = KnowledgeState.fresh(10, OR, k=4, explicit=True)
    for _ in range(4):
        if optimal_matching_known(state) is not None:
            break
        m = pol.next_matching(state.policy_view())
        step = or_scripted_step(state, m, 4, "LB3")
        assert step.outcomes == driver.respond(state, m)
        state = observe(state, m, step.outcomes)


def test_or_scripted_step_rejects_foreign_history():
    state = KnowledgeState.fresh(12, OR, k=4, explicit=True)
    m1 = lex_matching(12)
    o1 = OrScripted(4, "LB2").respond(
        KnowledgeState.fresh(12, OR, k=4, explicit=True), m1)
    state = observe(state, m1, o1)
    m2 = canonical_matching([(0, 2), (1, 3), (4, 6), (5, 7), (8, 10), (9, 11)])
    with pytest.raises(ValueError):
        or_scripted_step(state, m2, 4, "LB1")


def test_or_lb3_records_round_two_shortfall():
    driver = OrScripted(4, "LB3")
    state = KnowledgeState.fresh(10, OR, k=4, explicit=True)
    m1 = lex_matching(10)
    state = observe(state, m1, driver.respond(state, m1))
    # no explorations on offer, so the round-2 reveal quota cannot be met
    m2 = canonical_matching([(0, 2), (1, 3), (4, 6), (5, 7), (8, 9)])
    step = or_scripted_step(state, m2, 4, "LB3")
    assert any(s[0] == 2 for s in step.diagnostics["shortfalls"])
    assert step.diagnostics["beta"] is not None


# ---------------------------------------------------------------- lookahead

def test_greedy_round_one_fails_both_eq_teams():
    state = KnowledgeState.fresh(4, EQ, k=2, explicit=True)
    outs = GreedyMaxRegret(2, 0).respond(state, lex_matching(4))
    assert outs == (0, 0)


def test_greedy_full_depth_equals_solver_value():
    total, _, _ = play(FormUniformTeams(6), GreedyMaxRegret(2, None),
                       6, 2, EQ)
    assert total == regret_eq(6, 2) == 4


@pytest.mark.parametrize("n", [4, 6])
def test_greedy_full_depth_eq_sweep(n):
    for k in range(n + 1):
        total, _, _ = play(FormUniformTeams(n), GreedyMaxRegret(k, None),
                           n, k, EQ)
        assert total == regret_eq(n, k), (n, k)


def test_greedy_truthful_on_singleton_viable():
    state = KnowledgeState.fresh(4, EQ, k=0, explicit=True)
    outs = greedy_max_regret(state, lex_matching(4), 0)
    assert outs == (1, 1)


def test_greedy_needs_explicit_backend():
    state = KnowledgeState.fresh(6, EQ, k=2, explicit=False)
    with pytest.raises(ValueError):
        GreedyMaxRegret(2, 0).respond(state, lex_matching(6))


# ------------------------------------------------------------- consistency

FUZZ_CASES = [
    ("eq-bipartite", EQ, 3), ("eq-bipartite", EQ, 4),
    ("xor-cycle", XOR, 3), ("xor-cycle", XOR, 5),
    ("and-greedy", AND, 4), ("and-greedy", AND, 3),
    ("or-best", OR, 4), ("or-lb1", OR, 4), ("or-lb2", OR, 3),
    ("or-lb3", OR, 4), ("or-lb4", OR, 2),
    ("greedy", EQ, 4), ("greedy", XOR, 3), ("greedy", OR, 4),
    ("greedy", AND, 4),
]


@pytest.mark.parametrize("name,f,k", FUZZ_CASES)
@pytest.mark.parametrize("seed", [11, 23, 47])
def test_random_play_stays_consistent(name, f, k, seed):
    n = 8
    pol = RandomMatching(n, seed)
    adv = make_adversary(name, k)
    state = KnowledgeState.fresh(n, f, k=k, explicit=True)
    for _ in range(2 * n):
        m = pol.next_matching(state.policy_view())
        outs = adv.respond(state, m)
        state = observe(state, m, outs)  # raises if the viable set empties
    assert len(state.viable) >= 1


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10 ** 6),
       name=st.sampled_from(["eq-bipartite", "xor-cycle", "or-best",
                             "and-greedy"]))
def test_random_play_stays_consistent_fuzz(seed, name):
    n, k = 6, 3
    f = {"eq-bipartite": EQ, "xor-cycle": XOR, "or-best": OR,
         "and-greedy": AND}[name]
    pol = RandomMatching(n, seed)
    adv = make_adversary(name, k)
    state = KnowledgeState.fresh(n, f, k=k, explicit=True)
    for _ in range(n):
        m = pol.next_matching(state.policy_view())
        state = observe(state, m, adv.respond(state, m))
    assert len(state.viable) >= 1


def test_replays_are_deterministic():
    runs = []
    for _ in range(2):
        pol = FormUniformTeams(10)
        _, per, _ = play(pol, EqBipartite(4), 10, 4, EQ)
        runs.append(per)
    assert runs[0] == runs[1]


# ------------------------------------------------------------------ factory

def test_make_adversary_names():
    assert isinstance(make_adversary("eq-bipartite", 2), EqBipartite)
    assert isinstance(make_adversary("xor-cycle", 2), XorCycle)
    assert isinstance(make_adversary("and-greedy", 2), AndGreedy)
    assert isinstance(make_adversary("or-best", 2), OrScripted)
    assert isinstance(make_adversary("or-lb3", 2), OrScripted)
    g = make_adversary("greedy:2", 2)
    assert isinstance(g, GreedyMaxRegret) and g.depth == 2
    assert make_adversary("greedy:inf", 2).depth is None
    with pytest.raises(ValueError):
        make_adversary("unknown", 2)
    with pytest.raises(ValueError):
        make_adversary("greedy:x", 2)
