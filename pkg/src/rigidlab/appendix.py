"""Exhaustive enumerations for two finite examples separating notions of tolerance.

All probabilities are exact fractions.
"""

from collections import defaultdict
from fractions import Fraction
from itertools import product


# ---- six-point example ------------------------------------------------------------------

OMEGA = tuple(product((1, 2), (1, 2, 3)))
# Y takes each value on two points of Omega; (1,1) and (2,2) carry the value 3
Y_TABLE = {(1, 2): 1, (1, 3): 1, (2, 1): 2, (2, 3): 2, (1, 1): 3, (2, 2): 3}


def _generated_sets(func):
    """All events of sigma{func}: unions of level sets, as frozensets of outcomes."""
    levels = defaultdict(set)
    for w in OMEGA:
        levels[func(w)].add(w)
    blocks = list(levels.values())
    out = set()
    for mask in product((0, 1), repeat=len(blocks)):
        out.add(frozenset().union(*[b for b, m in zip(blocks, mask) if m]))
    return out


def six_point_example(y_table=None):
    y_table = Y_TABLE if y_table is None else y_table
    X = lambda w: w[1]  # noqa: E731
    Y = lambda w: y_table[w]  # noqa: E731
    common = _generated_sets(X) & _generated_sets(Y)
    trivial = common == {frozenset(), frozenset(OMEGA)}
    p = Fraction(1, len(OMEGA))
    conditional = {}
    for y in sorted(set(y_table.values())):
        ws = [w for w in OMEGA if Y(w) == y]
        tot = p * len(ws)
        law = defaultdict(Fraction)
        for w in ws:
            law[X(w)] += p / tot
        conditional[y] = dict(sorted(law.items()))
    sizes = sorted(len(v) for v in conditional.values())
    return {
        "common_sigma_algebra_trivial": trivial,
        "conditional_laws": conditional,
        "support_sizes": sizes,
        # (A) holds: nothing about X is determined by Y; (B) fails: every conditional law misses a value
        "A_holds": trivial,
        "B_fails": all(len(v) < 3 for v in conditional.values()),
    }


# ---- 2-dependent binary sequence ------------------------------------------------------------

def two_dependent_example(half_window=3):
    """Enumerate xi on sites -(h+1)..(h+1) and condition X_0 on X_k, 0 < |k| <= h.

    X_n = 1 iff xi_n = 1 or xi_{n-1} = xi_{n+1} = 1. Conditioning is done both on the
    full pattern (X_k)_{k != 0} in the window and on the pair (X_1, X_{-1}) alone.
    """
    h = half_window
    sites = range(-(h + 1), h + 2)
    weight = Fraction(1, 2 ** len(sites))
    full = defaultdict(lambda: [Fraction(0), Fraction(0)])
    pair = defaultdict(lambda: [Fraction(0), Fraction(0)])
    for xi_vals in product((0, 1), repeat=len(sites)):
        xi = dict(zip(sites, xi_vals))
        X = {n: int(xi[n] == 1 or (xi[n - 1] == 1 and xi[n + 1] == 1)) for n in range(-h, h + 1)}
        pattern = tuple(X[n] for n in range(-h, h + 1) if n != 0)
        full[pattern][X[0]] += weight
        pair[(X[1], X[-1])][X[0]] += weight
    full_cond = {pat: (v[0] + v[1], v[1] / (v[0] + v[1])) for pat, v in full.items()}
    pair_cond = {k: (v[0] + v[1], v[1] / (v[0] + v[1])) for k, v in sorted(pair.items())}
    idx1, idxm1 = h, h - 1  # positions of X_1 and X_{-1} inside a pattern
    forcing = [p for pat, (_, p) in full_cond.items() if pat[idx1] == 1 and pat[idxm1] == 1]
    other = [(pat, mass, p) for pat, (mass, p) in full_cond.items() if not (pat[idx1] == 1 and pat[idxm1] == 1)]
    nondeg_mass = sum((m for _, m, p in other if 0 < p < 1), Fraction(0))
    degenerate_other = sum(1 for _, _, p in other if p in (0, 1))
    return {
        "pair_conditional": {f"{a}{b}": {"probability": m, "P_X0_is_1": p} for (a, b), (m, p) in pair_cond.items()},
        "forcing_case_all_one": all(p == 1 for p in forcing) and len(forcing) > 0,
        "pair_nonforcing_strictly_inside": all(0 < p < 1 for (a, b), (_, p) in pair_cond.items() if (a, b) != (1, 1)),
        "pair_values_all_positive": len(pair_cond) == 4 and all(m > 0 for m, _ in pair_cond.values()),
        "full_patterns": len(full_cond),
        "full_nonforcing_degenerate_patterns": degenerate_other,
        "probability_nondegenerate": nondeg_mass,
        # (B): with positive probability X_0 stays undetermined; (C) fails: the forcing case has positive mass
        "B_holds": nondeg_mass > 0,
        "C_fails": pair_cond[(1, 1)][0] > 0 and pair_cond[(1, 1)][1] == 1,
    }


def verify_appendix_examples(half_window=3):
    six = six_point_example()
    seq = two_dependent_example(half_window)
    ok = (
        six["common_sigma_algebra_trivial"] and six["support_sizes"] == [2, 2, 2]
        and seq["forcing_case_all_one"] and seq["pair_nonforcing_strictly_inside"]
        and seq["pair_values_all_positive"] and seq["B_holds"] and seq["C_fails"]
    )
    return {"six_point": six, "two_dependent": seq, "all_checks_pass": bool(ok)}


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def appendix_report_dict(half_window=3):
    return _jsonable(verify_appendix_examples(half_window))
