"""Domain types, scoring, optimal values, and regret bound formulas.

Everything here is a plain value: matchings are sorted tuples of sorted
pairs, type assignments are bitmasks, synergies are frozen dataclasses.
Exact arithmetic (int / Fraction) is used throughout so that regret
accounting in tests never hits float noise.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Sequence, Tuple, Union

Pair = Tuple[int, int]
Matching = Tuple[Pair, ...]
Numeric = Union[int, Fraction, float]

BOOLEAN_KINDS = ("EQ", "XOR", "OR", "AND")


def _as_exact(x: Numeric) -> Fraction:
    # floats convert exactly (binary expansion); ints/Fractions pass through
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class Synergy:
    """A symmetric two-agent success function.

    kind is one of EQ, XOR, OR, AND, GENERAL.  The Boolean kinds output
    {0,1}; GENERAL carries three explicit values (v01 serves both orders,
    so symmetry holds by construction).
    """

    kind: str
    v00: Optional[Fraction] = None
    v01: Optional[Fraction] = None
    v11: Optional[Fraction] = None

    def __post_init__(self):
        if self.kind not in BOOLEAN_KINDS + ("GENERAL",):
            raise ValueError(f"unknown synergy kind {self.kind!r}")
        if self.kind == "GENERAL" and None in (self.v00, self.v01, self.v11):
            raise ValueError("GENERAL synergy needs v00, v01, v11")

    @staticmethod
    def general(v00: Numeric, v01: Numeric, v11: Numeric) -> "Synergy":
        return Synergy("GENERAL", _as_exact(v00), _as_exact(v01), _as_exact(v11))

    def values(self) -> Tuple[Fraction, Fraction, Fraction]:
        """The (v00, v01, v11) triple, Boolean kinds included."""
        if self.kind == "GENERAL":
            return (self.v00, self.v01, self.v11)
        table = {
            "EQ": (1, 0, 1),
            "XOR": (0, 1, 0),
            "OR": (0, 1, 1),
            "AND": (0, 0, 1),
        }
        a, b, c = table[self.kind]
        return (Fraction(a), Fraction(b), Fraction(c))

    def apply(self, a: int, b: int) -> Numeric:
        if self.kind == "EQ":
            return 1 if a == b else 0
        if self.kind == "XOR":
            return a ^ b
        if self.kind == "OR":
            return a | b
        if self.kind == "AND":
            return a & b
        v00, v01, v11 = self.v00, self.v01, self.v11
        return v00 if a + b == 0 else (v01 if a + b == 1 else v11)

    def is_boolean(self) -> bool:
        return self.kind in BOOLEAN_KINDS


EQ = Synergy("EQ")
XOR = Synergy("XOR")
OR = Synergy("OR")
AND = Synergy("AND")


@dataclass(frozen=True)
class TypeVector:
    """Ground-truth binary types for N agents, stored as a bitmask."""

    n: int
    bits: int

    def __post_init__(self):
        if self.bits < 0 or self.bits >> self.n:
            raise ValueError("bits outside [0, 2^n)")

    @staticmethod
    def from_types(types: Sequence[int]) -> "TypeVector":
        bits = 0
        for i, t in enumerate(types):
            if t not in (0, 1):
                raise ValueError("types must be 0/1")
            bits |= t << i
        return TypeVector(len(types), bits)

    def type_of(self, i: int) -> int:
        return (self.bits >> i) & 1

    @property
    def ones(self) -> int:
        return self.bits.bit_count()

    def as_list(self) -> list:
        return [(self.bits >> i) & 1 for i in range(self.n)]


def canonical_matching(pairs) -> Matching:
    """Sorted tuple of sorted pairs: the one stored form of a matching."""
    return tuple(sorted(tuple(sorted(p)) for p in pairs))


def check_perfect_matching(m: Matching, n: int) -> None:
    seen = set()
    for u, v in m:
        seen.add(u)
        seen.add(v)
    if len(m) != n // 2 or seen != set(range(n)):
        raise ValueError(f"not a perfect matching on {n} agents: {m}")


def all_matchings(n: int) -> Iterator[Matching]:
    """All perfect matchings on agents 0..n-1, in lexicographic order.

    The first unmatched agent is paired with every later free agent, so
    the yield order is lexicographic on the canonical form.  (n-1)!! total.
    """
    if n % 2:
        raise ValueError("n must be even")

    def rec(free: Tuple[int, ...], acc: Tuple[Pair, ...]):
        if not free:
            yield acc
            return
        u = free[0]
        rest = free[1:]
        for j, v in enumerate(rest):
            yield from rec(rest[:j] + rest[j + 1:], acc + ((u, v),))

    yield from rec(tuple(range(n)), ())


def count_matchings(n: int) -> int:
    out = 1
    for i in range(n - 1, 0, -2):
        out *= i
    return out


def score(m: Matching, t: TypeVector, f: Synergy) -> Numeric:
    """Total synergy of a matching under ground truth t."""
    check_perfect_matching(m, t.n)
    return sum(f.apply(t.type_of(u), t.type_of(v)) for u, v in m)


def optimal_score(n: int, k: int, f: Synergy) -> Numeric:
    """Best achievable score over all matchings when k of n agents are ones."""
    if n % 2:
        raise ValueError("n must be even")
    if not 0 <= k <= n:
        raise ValueError(f"k={k} outside [0, {n}]")
    if f.kind == "EQ":
        return n // 2 - (k % 2)
    if f.kind == "XOR":
        return min(k, n - k)
    if f.kind == "OR":
        return min(k, n // 2)
    if f.kind == "AND":
        return k // 2
    # a matching's score depends only on its (zz, zo, oo) pair counts and is
    # linear in oo once n, k are fixed, so the optimum sits at an oo endpoint
    v00, v01, v11 = f.values()
    best = None
    for oo in (max(0, k - n // 2), k // 2):
        zo = k - 2 * oo
        zz = n // 2 - zo - oo
        val = v00 * zz + v01 * zo + v11 * oo
        if best is None or val > best:
            best = val
    return best


def round_regret(m: Matching, outcomes: Sequence[Numeric], n: int, k: int,
                 f: Synergy) -> Numeric:
    if len(outcomes) != len(m):
        raise ValueError("outcome vector length != matching size")
    return optimal_score(n, k, f) - sum(outcomes)


@dataclass(frozen=True)
class ReducedSynergy:
    """Outcome of collapsing a GENERAL synergy onto a named kind.

    kind: EQ / XOR / AND / OR / CONSTANT / THREE_VALUED.
    scale and offset give the affine map x -> x/scale + offset carrying f's
    outputs onto the named kind's {0,1} outputs (endpoint-normalized for
    THREE_VALUED).  labels_swapped means types were relabeled 0 <-> 1, so a
    k-ones instance of f behaves like an (n-k)-ones instance of the target.
    regime is set only for THREE_VALUED: trivial / one_round / eq_like,
    keyed by the normalized mixed value against 1/2.
    """

    kind: str
    scale: Fraction
    offset: Fraction
    labels_swapped: bool
    regime: Optional[str] = None


def reduce_synergy(f: Synergy) -> ReducedSynergy:
    """Classify any symmetric synergy up to affine maps and label swaps."""
    v00, v01, v11 = f.values()
    swapped = False
    if v00 > v11:
        v00, v11 = v11, v00
        swapped = True
    if v00 == v01 == v11:
        return ReducedSynergy("CONSTANT", Fraction(1), Fraction(0), swapped)
    lo = min(v00, v01, v11)
    hi = max(v00, v01, v11)
    if len({v00, v01, v11}) == 3:
        # endpoint normalization: v00 -> 0, v11 -> 1; the mixed value decides
        scale = v11 - v00
        t = (v01 - v00) / scale
        if t == Fraction(1, 2):
            regime = "trivial"
        elif t > Fraction(1, 2):
            regime = "one_round"
        else:
            regime = "eq_like"
        return ReducedSynergy("THREE_VALUED", scale, -v00 / scale, swapped, regime)
    scale = hi - lo
    offset = -lo / scale
    g00, g01, g11 = ((v - lo) / scale for v in (v00, v01, v11))
    if (g00, g01, g11) == (1, 0, 1):
        kind = "EQ"
    elif (g00, g01, g11) == (0, 1, 0):
        kind = "XOR"
    elif (g00, g01, g11) == (0, 0, 1):
        kind = "AND"
    elif (g00, g01, g11) == (0, 1, 1):
        kind = "OR"
    else:  # pragma: no cover
        raise AssertionError("two-valued case table is exhaustive")
    return ReducedSynergy(kind, scale, offset, swapped)


def regret_eq(n: int, k: int) -> int:
    if n % 2:
        raise ValueError("n must be even")
    return 2 * (min(k, n - k) - (k % 2))


def regret_xor(n: int, k: int) -> int:
    if n % 2:
        raise ValueError("n must be even")
    return 2 * max(0, min(k, n - k) - 1 - (k % 2))


def l_and(n: int, k: int) -> int:
    return n - k


def u_and(n: int, k: int) -> int:
    return n - k + min(k, n - k) // 4


def _check_alpha(alpha: Fraction) -> None:
    if alpha < 0 or alpha > 1:
        raise ValueError(f"alpha={alpha} outside [0, 1]")


def l_or(alpha: Numeric) -> Numeric:
    """Per-n coefficient of the OR regret lower bound, piecewise in alpha."""
    a = _as_exact(alpha)
    _check_alpha(a)
    if a <= Fraction(1, 2):
        out = Fraction(13, 17) * a
    elif a <= Fraction(6, 11):
        out = (6 - 9 * a) / 4
    elif a <= Fraction(3, 5):
        out = (3 - 4 * a) / 3
    else:
        out = (1 - a) / 2
    return out if isinstance(alpha, Fraction) else float(out)


def u_or(alpha: Numeric) -> Numeric:
    """Per-n coefficient of the OR regret upper bound, piecewise in alpha."""
    a = _as_exact(alpha)
    _check_alpha(a)
    if a <= Fraction(1, 2):
        out = Fraction(4, 5) * a
    elif a < Fraction(10, 19):
        out = (10 - 16 * a) / 5
    elif a < Fraction(6, 11):
        out = (6 - 9 * a) / 4
    elif a < Fraction(3, 5):
        out = (3 - 4 * a) / 3
    else:
        out = (1 - a) / 2
    return out if isinstance(alpha, Fraction) else float(out)


def f_alpha_sawtooth(alpha: Numeric, n: int, zz: int) -> Numeric:
    """Regret of the commit-after-round-1 continuation as a function of the
    round-1 count zz of (0,0)-teams, for alpha > 1/2.

    f(zz) = floor(n/(2 zz)) * (n/2 - alpha n) + min(floor(n/(2 zz)) * zz,
    alpha n - zz).  Sawtooth in zz; local maxima at zz = alpha n / z for
    integer z, with value (z-1) * (1/2 - alpha + alpha/z) * n there.
    """
    a = _as_exact(alpha)
    if a <= Fraction(1, 2):
        raise ValueError("sawtooth regime needs alpha > 1/2")
    if not 1 <= zz <= a * n / 2:
        raise ValueError(f"zz={zz} outside [1, alpha*n/2]")
    q = n // (2 * zz)
    out = q * (Fraction(n, 2) - a * n) + min(q * zz, a * n - zz)
    if isinstance(alpha, Fraction):
        return out
    return float(out)


@dataclass(frozen=True)
class BoundsReport:
    """The regret bounds an (n, k, synergy) instance is held to."""

    kind: str
    n: int
    k: int
    alpha: Fraction
    s_opt: Numeric
    lower: Numeric
    upper: Numeric

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError("lower bound exceeds upper bound")


def bounds_report(n: int, k: int, f: Synergy) -> BoundsReport:
    """Evaluate the regret bound formulas for one instance.

    EQ and XOR are tight (lower == upper).  GENERAL synergies are reduced
    first and the target kind's bounds are rescaled; trivial reductions
    (CONSTANT, THREE_VALUED trivial regime) report 0.
    """
    if n % 2:
        raise ValueError("n must be even")
    if not 0 <= k <= n:
        raise ValueError(f"k={k} outside [0, {n}]")
    alpha = Fraction(n - k, n)
    s_opt = optimal_score(n, k, f)
    kind = f.kind
    scale = Fraction(1)
    keff = k
    if kind == "GENERAL":
        red = reduce_synergy(f)
        scale = red.scale
        if red.labels_swapped:
            keff = n - k
        if red.kind == "CONSTANT" or (red.kind == "THREE_VALUED"
                                      and red.regime == "trivial"):
            return BoundsReport(f.kind, n, k, alpha, s_opt, 0, 0)
        if red.kind == "THREE_VALUED":
            # eq_like scales by the mixed-value deficit; one_round pays at
            # most one round of the gap and we only report the trivial 0 lower
            lower = Fraction(0)
            upper = scale * n
            return BoundsReport(f.kind, n, k, alpha, s_opt, lower, upper)
        kind = red.kind
    aeff = Fraction(n - keff, n)
    if kind == "EQ":
        lo = hi = regret_eq(n, keff)
    elif kind == "XOR":
        lo = hi = regret_xor(n, keff)
    elif kind == "AND":
        lo, hi = l_and(n, keff), u_and(n, keff)
    else:
        lo, hi = l_or(aeff) * n, u_or(aeff) * n
    return BoundsReport(f.kind, n, k, alpha, s_opt, scale * lo, scale * hi)
