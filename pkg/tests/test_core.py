"""Core scoring, bounds, and reduction tests.

The brute-force oracles at the top are the ground truth here: they were
written first, against the definitions only, and the closed-form functions
are held to them exhaustively at small n.
"""

import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from synergy_arena.core import (
    AND, EQ, OR, XOR,
    Synergy, TypeVector,
    all_matchings, bounds_report, canonical_matching, count_matchings,
    f_alpha_sawtooth, l_and, l_or, optimal_score, reduce_synergy,
    regret_eq, regret_xor, round_regret, score, u_and, u_or,
)

KINDS = [EQ, XOR, OR, AND]


# ---------------------------------------------------------------- oracles

def brute_optimal_score(n, k, f):
    """Max score over every matching, for one representative type vector."""
    t = TypeVector(n, (1 << k) - 1)
    return max(score(m, t, f) for m in all_matchings(n))


def affine_image(f):
    """Independently recompute where a two-valued symmetric f must land.

    Works straight from the definition: try all four named kinds, both label
    orientations, and solve for the affine map; return every consistent
    (kind, scale, swapped) triple.
    """
    hits = []
    for kind in KINDS:
        for swapped in (False, True):
            pairs = []
            for a, b in ((0, 0), (0, 1), (1, 1)):
                fa = f.apply(a, b)
                ga = kind.apply(a ^ swapped, b ^ swapped)
                pairs.append((ga, Fraction(fa)))
            gs = {g for g, _ in pairs}
            if len(gs) < 2:
                continue
            (g0, f0), (g1, f1) = sorted(set(pairs))[:2]
            if g0 == g1:
                continue
            scale = (f1 - f0) / (g1 - g0)
            off = f0 - scale * g0
            if scale > 0 and all(fv == scale * gv + off for gv, fv in pairs):
                hits.append((kind.kind, scale, swapped))
    return hits


# ----------------------------------------------------------- matchings

def test_all_matchings_counts():
    for n in (2, 4, 6, 8):
        ms = list(all_matchings(n))
        assert len(ms) == count_matchings(n)
        assert len(set(ms)) == len(ms)
        for m in ms:
            assert m == canonical_matching(m)


def test_all_matchings_rejects_odd():
    with pytest.raises(ValueError):
        list(all_matchings(5))


def test_canonical_matching_sorts():
    assert canonical_matching([(3, 2), (1, 0)]) == ((0, 1), (2, 3))


# ----------------------------------------------------------------- score

def test_score_examples():
    t = TypeVector.from_types([1, 1, 0, 0])
    m = canonical_matching([(0, 1), (2, 3)])
    assert score(m, t, EQ) == 2
    assert score(m, t, AND) == 1
    t2 = TypeVector.from_types([1, 0, 1, 0])
    assert score(m, t2, XOR) == 2


def test_score_dimension_mismatch():
    t = TypeVector.from_types([1, 0])
    with pytest.raises(ValueError):
        score(((0, 1), (2, 3)), t, EQ)


@settings(max_examples=200)
@given(st.integers(2, 8).filter(lambda n: n % 2 == 0).flatmap(
    lambda n: st.tuples(st.just(n),
                        st.integers(0, 2 ** n - 1),
                        st.permutations(range(n)),
                        st.sampled_from(KINDS))))
def test_score_relabeling_invariant(args):
    n, bits, perm, f = args
    t = TypeVector(n, bits)
    tp = TypeVector.from_types([t.type_of(perm.index(i)) for i in range(n)])
    for m in all_matchings(n):
        mp = canonical_matching([(perm[u], perm[v]) for u, v in m])
        assert score(m, t, f) == score(mp, tp, f)


# -------------------------------------------------------- optimal_score

def test_optimal_score_examples():
    assert optimal_score(10, 3, EQ) == 4
    assert optimal_score(10, 3, OR) == 3
    assert optimal_score(10, 4, AND) == 2


def test_optimal_score_matches_brute_force():
    for n in (2, 4, 6, 8):
        for k in range(n + 1):
            for f in KINDS:
                assert optimal_score(n, k, f) == brute_optimal_score(n, k, f), \
                    (n, k, f.kind)


@settings(max_examples=60)
@given(st.integers(1, 3).map(lambda h: 2 * h),
       st.data(),
       st.tuples(st.integers(-5, 5), st.integers(-5, 5), st.integers(-5, 5)))
def test_optimal_score_general_matches_brute_force(n, data, vals):
    k = data.draw(st.integers(0, n))
    f = Synergy.general(*vals)
    assert optimal_score(n, k, f) == brute_optimal_score(n, k, f)


def test_optimal_score_validates():
    with pytest.raises(ValueError):
        optimal_score(5, 2, EQ)
    with pytest.raises(ValueError):
        optimal_score(4, 5, EQ)


# --------------------------------------------------------- round_regret

def test_round_regret_examples():
    m4 = canonical_matching([(0, 1), (2, 3)])
    assert round_regret(m4, [0, 0], 4, 2, EQ) == 2
    m10 = canonical_matching([(2 * i, 2 * i + 1) for i in range(5)])
    assert round_regret(m10, [1, 0, 0, 0, 0], 10, 4, AND) == 1
    m6 = canonical_matching([(0, 1), (2, 3), (4, 5)])
    assert round_regret(m6, [1, 1, 0], 6, 2, OR) == 0


# ------------------------------------------------------- bound formulas

def test_regret_eq_values():
    assert regret_eq(10, 4) == 8
    assert regret_eq(10, 5) == 8
    assert regret_eq(10, 0) == 0


def test_regret_xor_values():
    assert regret_xor(10, 5) == 6
    assert regret_xor(4, 1) == 0
    assert regret_xor(12, 6) == 10


def test_and_bounds_values():
    assert l_and(10, 4) == 6
    assert u_and(10, 4) == 7
    assert u_and(6, 2) == 4
    assert l_and(8, 8) == 0


def test_or_bounds_spot_values():
    assert l_or(Fraction(1, 2)) == Fraction(13, 34)
    assert u_or(Fraction(1, 2)) == Fraction(2, 5)
    # 0.55 sits in the (6/11, 3/5] piece where both bounds are (3-4a)/3
    assert l_or(Fraction(11, 20)) == Fraction(4, 15)
    assert u_or(Fraction(11, 20)) == Fraction(4, 15)
    assert l_or(0.0) == 0.0
    assert u_or(1.0) == 0.0


def test_or_bounds_reject_out_of_range():
    with pytest.raises(ValueError):
        l_or(1.2)
    with pytest.raises(ValueError):
        u_or(-0.1)


def test_u_or_continuous_at_half():
    assert u_or(Fraction(1, 2)) == Fraction(2, 5)
    eps = Fraction(1, 10 ** 9)
    assert abs(u_or(Fraction(1, 2) + eps) - Fraction(2, 5)) < Fraction(1, 10 ** 7)


@given(st.fractions(min_value=0, max_value=1))
def test_l_or_le_u_or(a):
    assert l_or(a) <= u_or(a)


def test_or_bounds_equal_above_10_19():
    for num in range(0, 1000):
        a = Fraction(10, 19) + Fraction(num, 1000) * Fraction(9, 19)
        if a > 1:
            break
        assert l_or(a) == u_or(a), a


def test_or_gap_below_half_is_3a_over_85():
    # 4a/5 - 13a/17 = 3a/85, peaking at 3/170 < 0.018 when a = 1/2
    worst = Fraction(0)
    for i in range(0, 501):
        a = Fraction(i, 1000)
        gap = u_or(a) - l_or(a)
        assert gap == Fraction(3, 85) * a
        worst = max(worst, gap)
    assert worst == Fraction(3, 170)


# ------------------------------------------------------------- sawtooth

def test_sawtooth_values():
    assert f_alpha_sawtooth(Fraction(3, 5), 100, 30) == 20
    assert f_alpha_sawtooth(Fraction(3, 5), 100, 20) == 20
    assert f_alpha_sawtooth(Fraction(3, 5), 100, 15) == 15
    assert f_alpha_sawtooth(Fraction(3, 5), 100, 12) == 8


def test_sawtooth_peak_formula():
    # value at zz = alpha*n/z is (z-1)(1/2 - alpha + alpha/z) n, valid while
    # floor(z/(2 alpha)) = z-1, which always covers the maximizing z
    cases = [(Fraction(3, 5), 100), (Fraction(13, 25), 500),
             (Fraction(27, 50), 200), (Fraction(7, 10), 100)]
    for a, n in cases:
        for z in range(2, 6):
            zz = a * n / z
            if zz.denominator != 1 or zz < 1 or z // (2 * a) != z - 1:
                continue
            want = (z - 1) * (Fraction(1, 2) - a + a / z) * n
            assert f_alpha_sawtooth(a, n, int(zz)) == want, (a, n, z)


def test_sawtooth_max_matches_u_or():
    # grid max over zz agrees with n*u_or(alpha) when alpha*n/z* is integral
    cases = [(Fraction(3, 5), 100), (Fraction(13, 25), 500),
             (Fraction(27, 50), 200), (Fraction(14, 25), 300),
             (Fraction(7, 10), 100)]
    for a, n in cases:
        zmax = int(a * n / 2)
        best = max(f_alpha_sawtooth(a, n, zz) for zz in range(1, zmax + 1))
        assert abs(best - u_or(a) * n) <= 1, (a, n, best)


def test_sawtooth_argmax_among_peaks():
    a, n = Fraction(3, 5), 1000
    zmax = int(a * n / 2)
    vals = {zz: f_alpha_sawtooth(a, n, zz) for zz in range(1, zmax + 1)}
    best = max(vals.values())
    argmax = {zz for zz, v in vals.items() if v == best}
    peaks = {int(a * n / z) for z in range(2, 6)}
    assert argmax <= peaks


def test_sawtooth_validates():
    with pytest.raises(ValueError):
        f_alpha_sawtooth(Fraction(2, 5), 100, 10)
    with pytest.raises(ValueError):
        f_alpha_sawtooth(Fraction(3, 5), 100, 31)


# ------------------------------------------------------ reduce_synergy

def test_reduce_examples():
    r = reduce_synergy(Synergy.general(5, 2, 5))
    assert (r.kind, r.scale, r.labels_swapped) == ("EQ", 3, False)
    assert reduce_synergy(Synergy.general(0, 0, 0)).kind == "CONSTANT"
    r = reduce_synergy(Synergy.general(1, 0, 0))  # NOR
    assert (r.kind, r.labels_swapped) == ("AND", True)
    r = reduce_synergy(Synergy.general(1, 1, 0))  # NAND
    assert (r.kind, r.labels_swapped) == ("OR", True)


def test_reduce_identity_on_boolean_tables():
    for f in KINDS:
        r = reduce_synergy(Synergy.general(*f.values()))
        assert (r.kind, r.scale, r.offset, r.labels_swapped) == \
            (f.kind, 1, 0, False)


def test_reduce_three_valued_regimes():
    assert reduce_synergy(Synergy.general(0, Fraction(1, 2), 1)).regime == "trivial"
    assert reduce_synergy(Synergy.general(0, Fraction(3, 4), 1)).regime == "one_round"
    assert reduce_synergy(Synergy.general(0, Fraction(1, 4), 1)).regime == "eq_like"
    # mixed value outside the endpoint range still classifies
    assert reduce_synergy(Synergy.general(0, 2, 1)).regime == "one_round"
    assert reduce_synergy(Synergy.general(0, -1, 1)).regime == "eq_like"
    # label swap happens before the midpoint test
    r = reduce_synergy(Synergy.general(1, Fraction(1, 4), 0))
    assert r.labels_swapped and r.regime == "eq_like"


def test_trivial_three_valued_scores_are_flat():
    # normalized mixed value 1/2 makes every matching score k/2
    f = Synergy.general(0, Fraction(1, 2), 1)
    for n, k in ((4, 2), (6, 3), (6, 4)):
        t = TypeVector(n, (1 << k) - 1)
        scores = {score(m, t, f) for m in all_matchings(n)}
        assert scores == {Fraction(k, 2)}


@settings(max_examples=200)
@given(st.tuples(st.integers(-4, 4), st.integers(-4, 4), st.integers(-4, 4)))
def test_reduce_agrees_with_affine_oracle(vals):
    f = Synergy.general(*vals)
    r = reduce_synergy(f)
    hits = affine_image(f)
    if r.kind in ("CONSTANT", "THREE_VALUED"):
        assert hits == []
    else:
        assert (r.kind, r.scale, r.labels_swapped) in hits


@settings(max_examples=100)
@given(st.tuples(st.integers(-4, 4), st.integers(-4, 4), st.integers(-4, 4)))
def test_reduce_affine_identity_pointwise(vals):
    # f(a,b) = scale * (g(a', b') - offset) with a' relabeled when swapped
    f = Synergy.general(*vals)
    r = reduce_synergy(f)
    if r.kind not in ("EQ", "XOR", "OR", "AND"):
        return
    g = Synergy(r.kind)
    s = int(r.labels_swapped)
    for a, b in ((0, 0), (0, 1), (1, 1)):
        assert Fraction(f.apply(a, b)) == \
            r.scale * (Fraction(g.apply(a ^ s, b ^ s)) - r.offset)


def test_reduce_score_identity_exhaustive_small_n():
    # whole-matching version of the affine identity, n <= 6
    fs = [Synergy.general(5, 2, 5), Synergy.general(1, 0, 0),
          Synergy.general(1, 1, 0), Synergy.general(0, 3, 3),
          Synergy.general(-1, -1, 2), Synergy.general(2, -1, 2)]
    for f in fs:
        r = reduce_synergy(f)
        g = Synergy(r.kind)
        s = int(r.labels_swapped)
        for n in (4, 6):
            for bits in range(2 ** n):
                t = TypeVector(n, bits)
                tb = TypeVector(n, bits ^ ((1 << n) - 1)) if s else t
                for m in all_matchings(n):
                    lhs = Fraction(score(m, t, f))
                    rhs = r.scale * (Fraction(score(m, tb, g))
                                     - (n // 2) * r.offset)
                    assert lhs == rhs


# -------------------------------------------------------- bounds_report

def test_bounds_report_fields():
    rep = bounds_report(10, 4, AND)
    assert (rep.lower, rep.upper) == (6, 7)
    assert rep.alpha == Fraction(3, 5)
    assert rep.s_opt == 2
    rep = bounds_report(10, 4, EQ)
    assert rep.lower == rep.upper == 8


def test_bounds_report_general_rescales():
    rep = bounds_report(6, 2, Synergy.general(5, 2, 5))  # EQ scaled by 3
    assert rep.lower == rep.upper == 3 * regret_eq(6, 2)
    rep = bounds_report(6, 2, Synergy.general(1, 0, 0))  # NOR: AND, k -> n-k
    assert rep.lower == l_and(6, 4)
    assert rep.upper == u_and(6, 4)


@settings(max_examples=150)
@given(st.integers(1, 10).map(lambda h: 2 * h), st.data(),
       st.one_of(st.sampled_from(KINDS),
                 st.tuples(st.integers(-3, 3), st.integers(-3, 3),
                           st.integers(-3, 3)).map(lambda v: Synergy.general(*v))))
def test_bounds_report_ordering(n, data, f):
    k = data.draw(st.integers(0, n))
    rep = bounds_report(n, k, f)
    assert rep.lower <= rep.upper
    assert 0 <= rep.alpha <= 1
