"""Closed-form probability bounds for the embedding game.

Every evaluator accepts ``exact=True`` to return a :class:`~fractions.Fraction`
instead of a float; the float result is the correctly rounded value of the
exact one.  ``D`` below stands for ``2**n - t``, the number of unexposed
leaves that a crossing of the middle layer can land on.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from fractions import Fraction

from .errors import BoundDomainError

CSV_COLUMNS = (
    "n", "t", "exit_bound", "improper_bound_paper", "improper_bound_terms", "total", "vacuous",
)


def _out(x: Fraction, exact: bool):
    return x if exact else float(x)


def _check(n: int, t: int) -> int:
    if n < 1:
        raise BoundDomainError(f"n must be >= 1, got {n}")
    if t < 0:
        raise BoundDomainError(f"t must be >= 0, got {t}")
    d = (1 << n) - t
    if d <= 0:
        raise BoundDomainError(f"t={t} >= 2**n={1 << n}: denominator 2**n - t is not positive")
    return d


def _check_height(h: int, n: int) -> None:
    if not 0 <= h <= n:
        raise BoundDomainError(f"height h={h} outside [0, {n}]")


def _pow2(k: int) -> Fraction:
    return Fraction(1 << k) if k >= 0 else Fraction(1, 1 << -k)


def exit_bound(t: int, n: int, exact: bool = False):
    """t**2 * 2**-n: at most t**2 attempts at n consecutive right moves."""
    if n < 1 or t < 1:
        raise BoundDomainError(f"need t >= 1 and n >= 1, got t={t}, n={n}")
    return _out(Fraction(t * t, 1 << n), exact)


def reach_bound_series(h: int, n: int, t: int, exact: bool = False):
    """sum_{h'=h}^{n} 2**(h-h') / D, the chance a path reaches a height-h vertex."""
    d = _check(n, t)
    _check_height(h, n)
    s = sum((_pow2(h - hp) for hp in range(h, n + 1)), Fraction(0))
    return _out(s / d, exact)


def pair_bound_both_sides(n: int, t: int, exact: bool = False):
    d = _check(n, t)
    return _out(Fraction(4, d * d), exact)


def pair_bound_refined(n: int, t: int, exact: bool = False):
    d = _check(n, t)
    return _out(Fraction(3, 2 * d * d), exact)


def ancestor_pair_bound(h: int, n: int, t: int, exact: bool = False):
    """2**(h-n) / D for the case where only one path crosses the middle."""
    d = _check(n, t)
    _check_height(h, n)
    return _out(_pow2(h - n) / d, exact)


def ancestor_sum(n: int, t: int, exact: bool = False):
    d = _check(n, t)
    return _out(Fraction(n + 1, d), exact)


def ancestor_sum_explicit(n: int, t: int, exact: bool = False):
    """The defining sum over left-half heights: sum_h 2**(n-h) * ancestor_pair_bound."""
    s = sum(
        ((1 << (n - h)) * ancestor_pair_bound(h, n, t, exact=True) for h in range(n + 1)),
        Fraction(0),
    )
    return _out(s, exact)


def improper_bound(t: int, n: int, exact: bool = False):
    """t**2 / D * (2**(n+2) / D + n + 1), as displayed in the final step."""
    d = _check(n, t)
    return _out(Fraction(t * t, d) * (Fraction(1 << (n + 2), d) + n + 1), exact)


def improper_bound_terms(t: int, n: int, exact: bool = False):
    """t**2 * (2**(n+2) * 4/D**2 + (n+1)/D): the per-pair terms summed literally.

    Larger than :func:`improper_bound` because the both-sides term keeps its
    factor 4.
    """
    per_pair = (1 << (n + 2)) * pair_bound_both_sides(n, t, exact=True) + ancestor_sum(n, t, exact=True)
    return _out(t * t * per_pair, exact)


@dataclass(frozen=True)
class BoundReport:
    n: int
    t: int
    exit_bound: float
    improper_bound: float
    improper_bound_terms: float
    total: float
    vacuous: bool

    def to_dict(self) -> dict:
        return asdict(self)

    def csv_row(self) -> dict:
        return {
            "n": self.n,
            "t": self.t,
            "exit_bound": repr(self.exit_bound),
            "improper_bound_paper": repr(self.improper_bound),
            "improper_bound_terms": repr(self.improper_bound_terms),
            "total": repr(self.total),
            "vacuous": str(self.vacuous).lower(),
        }


def total_win_bound(t: int, n: int) -> BoundReport:
    ex = exit_bound(t, n, exact=True)
    imp = improper_bound(t, n, exact=True)
    total = ex + imp
    return BoundReport(
        n=n,
        t=t,
        exit_bound=float(ex),
        improper_bound=float(imp),
        improper_bound_terms=float(improper_bound_terms(t, n, exact=True)),
        total=float(total),
        vacuous=total >= 1,
    )


def floor_root_pow2(n: int, k: int) -> int:
    """Largest integer q with q**k <= 2**n (exact floor of 2**(n/k))."""
    target = 1 << n
    lo, hi = 1 << (n // k), 1 << (n // k + 1)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if mid**k <= target:
            lo = mid
        else:
            hi = mid
    return lo


def theorem1_point(n: int) -> tuple[int, float]:
    """(floor(2**(n/6)) queries, 4 * 2**(-n/6) success bound)."""
    return floor_root_pow2(n, 6), 4.0 * 2.0 ** (-n / 6)


def theorem2_point(n: int) -> tuple[int, float]:
    """(floor(2**(n/3)) queries, total_win_bound at that t)."""
    q = floor_root_pow2(n, 3)
    return q, total_win_bound(q, n).total


def big_o_constant(n: int) -> float:
    """total_win_bound(floor(2**(n/3)), n) * 2**(n/3) / n."""
    q = floor_root_pow2(n, 3)
    return total_win_bound(q, n).total * 2.0 ** (n / 3) / n


def theorem_scan(n_min: int = 1, n_max: int = 120) -> dict:
    """Compare the two operating points for every n in ``[n_min, n_max]``.

    ``n0`` is the smallest n from which the second point has the smaller
    success bound for every larger n in the range (``None`` if never).
    """
    rows = []
    for n in range(n_min, n_max + 1):
        q1, p1 = theorem1_point(n)
        q2, p2 = theorem2_point(n)
        rows.append({"n": n, "queries1": q1, "bound1": p1, "queries2": q2, "bound2": p2,
                     "more_queries": q2 > q1, "smaller_bound": p2 < p1})
    n0 = None
    for row in reversed(rows):
        if not row["smaller_bound"]:
            break
        n0 = row["n"]
    return {"n0": n0, "rows": rows}


def bounds_table(ns, t: int | None = None) -> list[BoundReport]:
    """One report per n; ``t`` defaults to floor(2**(n/3))."""
    return [total_win_bound(floor_root_pow2(n, 3) if t is None else t, n) for n in ns]
