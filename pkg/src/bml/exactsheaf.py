"""Exact rational calculus of slopes, filtrations and stability invariants.

Everything in this module runs in arbitrary-precision rational arithmetic
(`fractions.Fraction`); no floating point enters.  The objects are sheaf
data for split bundles on P^1 and the tangent bundle of P^2, weighted
filtrations by saturated subsheaves, and the rational invariants attached
to them: the slope mu, the non-Archimedean slope of the energy along a
one-parameter degeneration, the predicted asymptotic slope of the log-det
energy, and the section-count (Le Potier) comparisons that detect
Gieseker stability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence


class MissingDegree(ValueError):
    pass


class EmptyCandidates(ValueError):
    pass


class UnsupportedBundle(ValueError):
    pass


class BoundTooSmall(ValueError):
    pass


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


# ---------------------------------------------------------------------------
# Sheaf data


def h0_p1(d: int) -> int:
    """dim H^0(P^1, O(d))."""
    return max(d + 1, 0)


def h0_p2(d: int) -> int:
    """dim H^0(P^2, O(d))."""
    return (d + 1) * (d + 2) // 2 if d >= 0 else 0


def h0_tangent_p2(m: int) -> int:
    """dim H^0(P^2, T(m)) from the Euler sequence (valid for m >= -1)."""
    if m < -1:
        raise UnsupportedBundle("twist below the vanishing range")
    return 3 * h0_p2(m + 1) - h0_p2(m)


@dataclass(frozen=True)
class SheafData:
    """Exact rank/degree/section-count data of a torsion-free sheaf."""

    rank: int
    degree: Optional[Fraction]
    space_tag: str
    h0_table: dict = field(default_factory=dict)
    label: str = ""

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError("rank must be >= 1")
        if self.degree is not None:
            object.__setattr__(self, "degree", _frac(self.degree))

    def h0_at(self, k: int) -> int:
        try:
            return self.h0_table[k]
        except KeyError:
            raise MissingDegree(f"no h0 data at level {k} for {self.label or 'sheaf'}")


def line_p1(d: int, levels: Sequence[int] = range(-8, 40)) -> SheafData:
    return SheafData(
        rank=1,
        degree=Fraction(d),
        space_tag="P1",
        h0_table={k: h0_p1(d + k) for k in levels},
        label=f"O({d})",
    )


def split_p1(degrees: Sequence[int], levels: Sequence[int] = range(-8, 40)) -> SheafData:
    degrees = list(degrees)
    return SheafData(
        rank=len(degrees),
        degree=Fraction(sum(degrees)),
        space_tag="P1",
        h0_table={k: sum(h0_p1(d + k) for d in degrees) for k in levels},
        label="O(" + ")+O(".join(str(d) for d in degrees) + ")",
    )


def tangent_p2(levels: Sequence[int] = range(-1, 20)) -> SheafData:
    return SheafData(
        rank=2,
        degree=Fraction(3),
        space_tag="P2",
        h0_table={k: h0_tangent_p2(k) for k in levels},
        label="T_P2",
    )


def mu(sheaf: SheafData) -> Fraction:
    """Slope degree/rank, exactly."""
    if sheaf.degree is None:
        raise MissingDegree(f"{sheaf.label or 'sheaf'} has no exact degree")
    return sheaf.degree / sheaf.rank


# ---------------------------------------------------------------------------
# Filtrations and weight gradings


@dataclass(frozen=True)
class FiltrationSpec:
    """Filtration by saturated subsheaves with section-space dimensions.

    ``weights`` are the strictly decreasing eigenvalues of the generator;
    ``steps[i]`` is the subsheaf spanned below weight level i (so ranks are
    nondecreasing and the last step is the ambient sheaf); ``v_dims[i]``
    is the dimension of the corresponding flag step in the section space
    at the working ``level``.
    """

    weights: tuple
    steps: tuple
    v_dims: tuple
    ambient: SheafData
    level: int

    def __post_init__(self):
        ws = tuple(_frac(w) for w in self.weights)
        object.__setattr__(self, "weights", ws)
        object.__setattr__(self, "steps", tuple(self.steps))
        object.__setattr__(self, "v_dims", tuple(int(v) for v in self.v_dims))
        if not all(a > b for a, b in zip(ws, ws[1:])):
            raise ValueError("weights must be strictly decreasing")
        if len(self.steps) != len(ws) or len(self.v_dims) != len(ws):
            raise ValueError("weights, steps and v_dims must have equal length")
        ranks = [s.rank for s in self.steps]
        if any(a > b for a, b in zip(ranks, ranks[1:])):
            raise ValueError("step ranks must be nondecreasing")
        if ranks[-1] != self.ambient.rank:
            raise ValueError("last step must have the ambient rank")
        if not all(a < b for a, b in zip(self.v_dims, self.v_dims[1:])):
            raise ValueError("v_dims must be strictly increasing")
        mult = [self.v_dims[0]] + [
            b - a for a, b in zip(self.v_dims, self.v_dims[1:])
        ]
        if sum(w * m for w, m in zip(ws, mult)) != 0:
            raise ValueError("weights must be trace-free against v_dims")
        if max(abs(w) for w in ws) > 1:
            raise ValueError("weight operator norm must be <= 1")

    @property
    def nu(self) -> int:
        return len(self.weights)

    def graded_ranks(self) -> list:
        ranks = [s.rank for s in self.steps]
        return [ranks[0]] + [b - a for a, b in zip(ranks, ranks[1:])]

    def h0_ambient(self) -> int:
        return self.v_dims[-1]


def trivial_filtration(ambient: SheafData, level: int) -> FiltrationSpec:
    h0 = ambient.h0_at(level)
    return FiltrationSpec(
        weights=(Fraction(0),), steps=(ambient,), v_dims=(h0,), ambient=ambient, level=level
    )


def j_of_zeta(weights: Sequence) -> int:
    """Least common multiple of the reduced denominators."""
    return math.lcm(*[_frac(w).denominator for w in weights]) if weights else 1


@dataclass(frozen=True)
class WeightGrading:
    j: int
    integer_weights: tuple
    surviving_indices: tuple


def weight_grading(filt: FiltrationSpec) -> WeightGrading:
    j = j_of_zeta(filt.weights)
    iw = tuple(int(w * j) for w in filt.weights)
    gr = filt.graded_ranks()
    surv = tuple(i for i, g in enumerate(gr) if g > 0)
    if not surv or surv[0] != 0:
        raise ValueError("the top weight must always survive")
    return WeightGrading(j=j, integer_weights=iw, surviving_indices=surv)


def _step_at_grade(filt: FiltrationSpec, iw: tuple, q: int) -> int:
    """Index i of the filtration step active at integer grade q.

    The step below weight level i spans grades q >= -iw[i]; the active
    step at q is the deepest one already switched on.
    """
    active = -1
    for i, w in enumerate(iw):
        if -w <= q:
            active = i
    return active


def m_na(filt: FiltrationSpec) -> Fraction:
    """Non-Archimedean slope (2/j) sum_q rk(E_q) (mu(E) - mu(E_q)).

    The integer-grade sum runs over its finite support; grades where the
    active step is zero or all of E contribute nothing.
    """
    grading = weight_grading(filt)
    iw = grading.integer_weights
    mu_e = mu(filt.ambient)
    total = Fraction(0)
    for q in range(-iw[0], -iw[-1]):
        i = _step_at_grade(filt, iw, q)
        if i < 0:
            continue
        step = filt.steps[i]
        total += step.rank * (mu_e - mu(step))
    return Fraction(2, grading.j) * total


def j_na(grading: WeightGrading, weights: Sequence) -> Fraction:
    """Largest gap between surviving weights; zero iff the filtration is trivial."""
    ws = [_frac(weights[i]) for i in grading.surviving_indices]
    return max(ws) - min(ws)


def m2_slope_prediction(filt: FiltrationSpec) -> Fraction:
    """Exact predicted asymptotic slope of the log-det energy M2 along
    the one-parameter degeneration defined by ``filt``."""
    grading = weight_grading(filt)
    iw = grading.integer_weights
    r = filt.ambient.rank
    h0 = filt.h0_ambient()
    total = Fraction(0)
    for q in range(-iw[0], -iw[-1]):
        i = _step_at_grade(filt, iw, q)
        if i < 0:
            continue
        rk = filt.steps[i].rank
        v = filt.v_dims[i]
        total += rk * (Fraction(h0, r) - Fraction(v, rk))
    return Fraction(2, grading.j) * Fraction(r, h0) * total


def weight_sum_identity(filt: FiltrationSpec) -> tuple:
    """Return (lhs, rhs): lhs = sum_i w_i rk(gr_i E), rhs = the brute-force
    M2 slope.  The trace-free constraint forces rhs = 2 lhs exactly."""
    lhs = sum(
        (w * g for w, g in zip(filt.weights, filt.graded_ranks())), Fraction(0)
    )
    rhs = m2_slope_prediction(filt)
    return lhs, rhs


# ---------------------------------------------------------------------------
# Stability verdicts


def le_potier_verdict(sub: SheafData, ambient: SheafData, k: int) -> int:
    """Sign of h0(F(k))/rk(F) - h0(E(k))/rk(E).

    Positive means the subsheaf destabilizes in the Gieseker sense at
    level k, zero means borderline, negative means it does not.
    """
    if not 0 < sub.rank < ambient.rank:
        raise ValueError("need a proper nonzero subsheaf")
    diff = Fraction(sub.h0_at(k), sub.rank) - Fraction(ambient.h0_at(k), ambient.rank)
    return (diff > 0) - (diff < 0)


def slope_stability_verdict(ambient: SheafData, candidates: Sequence[SheafData]):
    """Slope-compare against a user-supplied list of saturated subsheaves.

    Returns (verdict, witness) where verdict is one of 'stable',
    'semistable', 'unstable' relative to the list and witness is the
    candidate of maximal slope.
    """
    if not candidates:
        raise EmptyCandidates("need at least one candidate subsheaf")
    mu_e = mu(ambient)
    witness = max(candidates, key=lambda c: (mu(c), c.rank))
    top = mu(witness)
    if top > mu_e:
        return "unstable", witness
    if top == mu_e:
        return "semistable", witness
    return "stable", witness


def f_max_split(degrees: Sequence[int]) -> SheafData:
    """Maximal destabilizing subsheaf of a split bundle on P^1: the direct
    sum of all summands of maximal degree (maximal slope, then rank)."""
    d = max(degrees)
    return split_p1([a for a in degrees if a == d])


def regularity_catalog(bundle) -> int:
    """Castelnuovo-Mumford regularity of a catalog bundle.

    Split bundles on P^1: H^1(O(d-1)) = 0 iff d >= 0, so reg = max(-d_i).
    The tangent bundle of P^2: twisting the Euler sequence and chasing
    the long exact sequence gives H^1(T(-2)) = H^2(T(-3)) = 0 while
    H^1(T(-3)) is one-dimensional, so reg = -1.
    """
    kind = getattr(bundle, "kind", None) or bundle
    if isinstance(kind, (list, tuple)):
        return max(-d for d in kind)
    if isinstance(kind, SheafData):
        if kind.space_tag == "P2":
            return -1
        raise UnsupportedBundle("regularity known only for catalog bundles")
    if kind == "euler_tp2":
        return -1
    raise UnsupportedBundle(f"unknown catalog bundle {bundle!r}")


def k0_level(bundle) -> int:
    """Effective level max(reg(E), reg(F_max))."""
    kind = getattr(bundle, "kind", None) or bundle
    if isinstance(kind, (list, tuple)):
        return max(regularity_catalog(kind), -max(kind))
    # the tangent bundle is stable, so it is its own maximal subsheaf
    return regularity_catalog(bundle)


# ---------------------------------------------------------------------------
# Rational approximation of real weights


def _best_fraction_in(lo: float, hi: float, target: float, bound: int):
    """Closest fraction to ``target`` with denominator <= bound lying in
    the open interval (lo, hi); None if the interval contains none."""
    best = None
    for q in range(1, bound + 1):
        p_lo = math.floor(lo * q) - 1
        p_hi = math.ceil(hi * q) + 1
        for p in range(p_lo, p_hi + 1):
            cand = Fraction(p, q)
            c = float(cand)
            if not (lo < c < hi):
                continue
            key = (abs(c - target), cand.denominator)
            if best is None or key < best[0]:
                best = (key, cand)
    return None if best is None else best[1]


def rationalize_weights(real_weights: Sequence[float], denominator_bound: int):
    """Approximate strictly decreasing real weights by rationals w~ with
    denominators <= bound such that w~ is strictly decreasing and the
    differences w - w~ are strictly decreasing as well.

    Inputs that are already rational within the bound are returned
    unchanged (the difference condition is vacuous at zero error).
    """
    ws = [float(w) for w in real_weights]
    if not all(a > b for a, b in zip(ws, ws[1:])):
        raise ValueError("weights must be strictly decreasing")
    exact = [Fraction(w).limit_denominator(denominator_bound) for w in ws]
    if all(float(e) == w for e, w in zip(exact, ws)):
        return exact
    out = []
    prev_val = math.inf
    prev_diff = math.inf
    for w in ws:
        lo = max(w - prev_diff, w - 1.0)
        hi = min(prev_val, w + 1.0)
        cand = _best_fraction_in(lo, hi, w, denominator_bound)
        if cand is None:
            raise BoundTooSmall(
                f"no admissible rational near {w} with denominator <= {denominator_bound}"
            )
        out.append(cand)
        prev_val = float(cand)
        prev_diff = w - prev_val
    return out


# ---------------------------------------------------------------------------
# Serialization helpers


def frac_str(x: Fraction) -> str:
    x = _frac(x)
    return f"{x.numerator}" if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def parse_frac(s) -> Fraction:
    return _frac(s) if not isinstance(s, str) else Fraction(s)


def filtration_to_dict(filt: FiltrationSpec) -> dict:
    return {
        "weights": [frac_str(w) for w in filt.weights],
        "steps": [
            {
                "rank": s.rank,
                "degree": None if s.degree is None else frac_str(s.degree),
                "h0_table": {str(k): v for k, v in sorted(s.h0_table.items())},
            }
            for s in filt.steps
        ],
        "v_dims": list(filt.v_dims),
        "level": filt.level,
    }


def filtration_from_dict(data: dict, space_tag: str = "P1") -> FiltrationSpec:
    steps = tuple(
        SheafData(
            rank=s["rank"],
            degree=None if s.get("degree") is None else parse_frac(s["degree"]),
            space_tag=space_tag,
            h0_table={int(k): v for k, v in s.get("h0_table", {}).items()},
        )
        for s in data["steps"]
    )
    return FiltrationSpec(
        weights=tuple(parse_frac(w) for w in data["weights"]),
        steps=steps,
        v_dims=tuple(data["v_dims"]),
        ambient=steps[-1],
        level=int(data["level"]),
    )
