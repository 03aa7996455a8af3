"""Online two-person team formation: simulator, adversaries, exact solver."""

from .core import (
    AND,
    EQ,
    OR,
    XOR,
    BoundsReport,
    Matching,
    ReducedSynergy,
    Synergy,
    TypeVector,
    all_matchings,
    bounds_report,
    canonical_matching,
    f_alpha_sawtooth,
    l_and,
    l_or,
    optimal_score,
    reduce_synergy,
    regret_eq,
    regret_xor,
    round_regret,
    score,
    u_and,
    u_or,
)
from .exploration import (
    ExplorationGraph,
    KnowledgeState,
    observe,
    optimal_matching_known,
)
from .exact_lab import (
    Census,
    GameValue,
    HardCase,
    HardCaseReport,
    IndepPair,
    MatchingGame,
    NodeBudgetExceeded,
    OutcomeClass,
    census_104,
    classify_104,
    enumerate_round3_graphs,
    graph_automorphisms,
    matching_decompositions,
    minimax_regret,
    perfect_matchings_within,
    verify_hardcase_blue_edges,
    verify_reduction,
)
from .policies import (
    CliqueFirstFactorization,
    FormDiverseTeams,
    FormUniformTeams,
    MaxExploit,
    NaiveFactorization,
    POLICIES,
    RepairEvent,
    RingWeaver,
    lex_matching,
    make_policy,
    ring_factorization,
)
from .adversaries import (
    Adversary,
    AndGreedy,
    AndGreedyStep,
    EqBipartite,
    GreedyMaxRegret,
    OrScripted,
    OrStep,
    RevealableSet,
    XorCycle,
    and_greedy_step,
    greedy_max_regret,
    make_adversary,
    minimal_revealable_set,
    or_scripted_step,
)
from .arena import (
    GameResult,
    RoundRecord,
    Trace,
    check_trace_invariants,
    run_game,
    sweep,
    trace_json,
)

__all__ = [
    "AND", "EQ", "OR", "XOR",
    "BoundsReport", "Matching", "ReducedSynergy", "Synergy", "TypeVector",
    "all_matchings", "bounds_report", "canonical_matching",
    "f_alpha_sawtooth", "l_and", "l_or", "optimal_score", "reduce_synergy",
    "regret_eq", "regret_xor", "round_regret", "score", "u_and", "u_or",
    "ExplorationGraph", "KnowledgeState", "observe", "optimal_matching_known",
    "Census", "GameValue", "HardCase", "HardCaseReport", "IndepPair",
    "MatchingGame", "NodeBudgetExceeded", "OutcomeClass", "census_104",
    "classify_104", "enumerate_round3_graphs", "graph_automorphisms",
    "matching_decompositions", "minimax_regret", "perfect_matchings_within",
    "verify_hardcase_blue_edges", "verify_reduction",
    "CliqueFirstFactorization", "FormDiverseTeams", "FormUniformTeams",
    "MaxExploit", "NaiveFactorization", "POLICIES", "RepairEvent",
    "RingWeaver", "lex_matching", "make_policy", "ring_factorization",
    "Adversary", "AndGreedy", "AndGreedyStep", "EqBipartite",
    "GreedyMaxRegret", "OrScripted", "OrStep", "RevealableSet", "XorCycle",
    "and_greedy_step", "greedy_max_regret", "make_adversary",
    "minimal_revealable_set", "or_scripted_step",
    "GameResult", "RoundRecord", "Trace", "check_trace_invariants",
    "run_game", "sweep", "trace_json",
]
