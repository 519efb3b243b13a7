"""Exact-rational constraint kernel.

Firing domains are difference bound matrices (DBMs) over variables that
measure remaining times: entry[i][j] encodes ``v_i - v_j <= entry[i][j]``
with index 0 reserved for the constant reference 0.  All relations are
non-strict, all constants are exact rationals, and ``INF`` marks the
absence of an upper bound.  Canonicalization is all-pairs shortest paths
(Floyd-Warshall); satisfiability is absence of a negative cycle; general
projection goes through Fourier-Motzkin on a small linear-inequality
system because pivot substitution leaves the DBM fragment.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

from .errors import UnknownVariableError, UnsatisfiableError


class _Infinity:
    """Positive infinity for upper bounds; orders above every Fraction."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True

    def __add__(self, other):
        return self

    __radd__ = __add__

    def __sub__(self, other):
        if other is self:
            raise ArithmeticError("inf - inf is undefined")
        return self

    def __neg__(self):
        raise ArithmeticError("bounds have no negative infinity")

    def __repr__(self):
        return "inf"


INF = _Infinity()

Bound = Union[Fraction, _Infinity]

ZERO_REF = "0"  # display name of the reference variable


def is_finite(b: Bound) -> bool:
    return b is not INF


def bound_str(b: Bound) -> str:
    if b is INF:
        return "inf"
    return str(b)


def rat(value) -> Fraction:
    """Coerce ints/strings like ``7`` or ``5/2`` to an exact rational."""
    return Fraction(value)


@dataclass(frozen=True)
class FiringDomain:
    """A set of inequalities over non-negative remaining-time variables.

    ``variables`` fixes row/column order (index 0 is the reference).  The
    implicit constraints ``v - v <= 0`` and ``0 - v <= 0`` are always
    materialized, so every variable is non-negative by construction.
    Instances are immutable; operations return fresh domains.
    """

    variables: tuple[str, ...]
    entries: tuple[tuple[Bound, ...], ...]
    canonical_flag: bool = False

    # -- construction -------------------------------------------------

    @staticmethod
    def from_intervals(items: Iterable[tuple[str, Fraction, Bound]]) -> "FiringDomain":
        """Build a box domain ``lo <= v <= hi`` per (name, lo, hi) item."""
        items = list(items)
        names = tuple(name for name, _, _ in items)
        if len(set(names)) != len(names):
            raise ValueError("duplicate variable names")
        n = len(names)
        m = _fresh_matrix(n)
        for k, (_, lo, hi) in enumerate(items, start=1):
            if lo < 0:
                raise ValueError(f"negative lower bound for {names[k - 1]!r}")
            if hi < lo:
                raise ValueError(f"empty interval for {names[k - 1]!r}")
            m[0][k] = -lo
            m[k][0] = hi
        return FiringDomain(names, _freeze(m))

    def _index(self, var: str) -> int:
        try:
            return self.variables.index(var) + 1
        except ValueError:
            raise UnknownVariableError(f"no variable {var!r} in domain") from None

    def has_variable(self, var: str) -> bool:
        return var in self.variables

    # -- inspection ---------------------------------------------------

    def lower(self, var: str) -> Fraction:
        """Greatest known lower bound of ``var`` (0 when unconstrained)."""
        b = self.entries[0][self._index(var)]
        return -b if is_finite(b) else Fraction(0)

    def upper(self, var: str) -> Bound:
        return self.entries[self._index(var)][0]

    def difference_bound(self, lhs: str, rhs: str) -> Bound:
        return self.entries[self._index(lhs)][self._index(rhs)]

    def is_canonical(self) -> bool:
        return self.canonical_flag

    # -- core operations ----------------------------------------------

    def canonical(self) -> "FiringDomain":
        """Tightest equivalent domain, or raise UnsatisfiableError.

        Floyd-Warshall closure over the constraint graph; a negative
        diagonal after closure witnesses a negative cycle.  Idempotent.
        """
        if self.canonical_flag:
            return self
        n = len(self.variables) + 1
        m = [list(row) for row in self.entries]
        for k in range(n):
            mk = m[k]
            for i in range(n):
                mik = m[i][k]
                if mik is INF:
                    continue
                row = m[i]
                for j in range(n):
                    mkj = mk[j]
                    if mkj is INF:
                        continue
                    s = mik + mkj
                    if s < row[j]:
                        row[j] = s
        for i in range(n):
            if m[i][i] < 0:
                raise UnsatisfiableError("negative cycle in constraint graph")
            m[i][i] = Fraction(0)
        # Variables are non-negative times: re-assert the implicit floor.
        for i in range(1, n):
            if m[0][i] > 0:
                m[0][i] = Fraction(0)
        return FiringDomain(self.variables, _freeze(m), canonical_flag=True)

    def satisfiable(self) -> bool:
        try:
            self.canonical()
        except UnsatisfiableError:
            return False
        return True

    def tighten(self, lhs: str | None, rhs: str | None, bound: Bound) -> "FiringDomain":
        """Intersect with ``lhs - rhs <= bound`` (None stands for 0).

        The entry is lowered to ``min(existing, bound)``; a looser bound
        leaves the domain unchanged.
        """
        i = 0 if lhs is None else self._index(lhs)
        j = 0 if rhs is None else self._index(rhs)
        if i == j:
            raise UnknownVariableError("constraint needs two distinct sides")
        if self.entries[i][j] <= bound:
            return self
        m = [list(row) for row in self.entries]
        m[i][j] = bound
        return FiringDomain(self.variables, _freeze(m))

    def shift(self, amount: Fraction) -> "FiringDomain":
        """Rebase every variable by ``amount`` elapsed time units.

        Unary bounds drop by ``amount`` (lower bounds floor at 0),
        differences are unaffected.  Upper bounds may go negative; the
        caller is expected to have projected away dying variables first.
        """
        if amount < 0:
            raise ValueError("shift amount must be non-negative")
        if amount == 0:
            return self
        m = [list(row) for row in self.entries]
        n = len(self.variables) + 1
        for i in range(1, n):
            if is_finite(m[i][0]):
                m[i][0] = m[i][0] - amount
            lo = m[0][i] + amount
            m[0][i] = lo if lo < 0 else Fraction(0)
        return FiringDomain(self.variables, _freeze(m))

    def eliminate(self, var: str) -> "FiringDomain":
        """Project the solution set onto the remaining variables.

        For a DBM, Fourier-Motzkin elimination of one variable is exactly
        one relaxation sweep through its node: every path through ``var``
        becomes a direct edge.  Satisfiability is preserved.
        """
        v = self._index(var)
        n = len(self.variables) + 1
        keep = [i for i in range(n) if i != v]
        m = []
        for i in keep:
            row = []
            via_iv = self.entries[i][v]
            for j in keep:
                direct = self.entries[i][j]
                if via_iv is not INF and self.entries[v][j] is not INF:
                    through = via_iv + self.entries[v][j]
                    if through < direct:
                        direct = through
                row.append(direct)
            m.append(row)
        names = tuple(x for x in self.variables if x != var)
        return FiringDomain(names, _freeze(m))

    def eliminate_all(self, names: Iterable[str]) -> "FiringDomain":
        dom = self
        for name in names:
            dom = dom.eliminate(name)
        return dom

    def delay_closure(self) -> "FiringDomain":
        """Drop all upper bounds: the future of the zone under time elapse."""
        m = [list(row) for row in self.entries]
        for i in range(1, len(self.variables) + 1):
            m[i][0] = INF
        return FiringDomain(self.variables, _freeze(m))

    def reset_to_zero(self, var: str) -> "FiringDomain":
        """Set ``var := 0``; call on a canonical domain."""
        base = self.canonical()
        v = base._index(var)
        m = [list(row) for row in base.entries]
        n = len(base.variables) + 1
        for j in range(n):
            m[v][j] = m[0][j]
            m[j][v] = m[j][0]
        m[v][v] = Fraction(0)
        return FiringDomain(base.variables, _freeze(m))

    # -- display ------------------------------------------------------

    def inequalities(self) -> list[str]:
        """Human-readable, sorted, redundancy-pruned constraint list.

        Unary bounds print as ``a <= v <= b`` (or ``v = a``); a diagonal
        prints only when tighter than what the unary box already implies.
        """
        dom = self.canonical()
        out = []
        for k, name in enumerate(dom.variables, start=1):
            lo = dom.lower(name)
            hi = dom.entries[k][0]
            if is_finite(hi) and lo == hi:
                out.append(f"{name} = {lo}")
            else:
                out.append(f"{lo} <= {name} <= {bound_str(hi)}")
        n = len(dom.variables)
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                if i == j:
                    continue
                c = dom.entries[i][j]
                if c is INF:
                    continue
                box = dom.entries[i][0] + dom.entries[0][j]
                if c < box:
                    out.append(
                        f"{dom.variables[i - 1]} - {dom.variables[j - 1]} <= {c}"
                    )
        return out

    def __str__(self) -> str:
        return "{" + ", ".join(self.inequalities()) + "}"


def _fresh_matrix(n_vars: int) -> list[list[Bound]]:
    n = n_vars + 1
    m = [[INF] * n for _ in range(n)]
    for i in range(n):
        m[i][i] = Fraction(0)
    for j in range(1, n):
        m[0][j] = Fraction(0)  # v >= 0
    return m


def _freeze(m: Sequence[Sequence[Bound]]) -> tuple[tuple[Bound, ...], ...]:
    return tuple(tuple(row) for row in m)


# -- spec-level functional aliases -------------------------------------


def canonical(domain: FiringDomain) -> FiringDomain:
    return domain.canonical()


def satisfiable(domain: FiringDomain) -> bool:
    return domain.satisfiable()


def add_constraint(
    domain: FiringDomain, lhs: str | None, rhs: str | None, bound: Bound
) -> FiringDomain:
    return domain.tighten(lhs, rhs, bound)


def shift_constant(domain: FiringDomain, amount: Fraction) -> FiringDomain:
    return domain.shift(amount)


def eliminate(domain: FiringDomain, var: str) -> FiringDomain:
    return domain.eliminate(var)


# -- general linear systems (pivot substitution leaves the DBM world) --


@dataclass(frozen=True)
class Inequality:
    """``sum(coeff * var) <= bound`` with rational coefficients."""

    coeffs: tuple[tuple[str, Fraction], ...]
    bound: Bound

    def pattern(self) -> tuple[tuple[str, Fraction], ...]:
        return self.coeffs


class LinearSystem:
    """A conjunction of linear inequalities over named variables.

    Used for the substitution step of successor computation, where
    constraints of the form ``a <= pivot + v' <= b`` appear and the DBM
    encoding no longer applies.  Supports Fourier-Motzkin elimination
    and conversion back to a :class:`FiringDomain` once every remaining
    inequality is unary or a difference.
    """

    def __init__(self, variables: Sequence[str], rows: Iterable[Inequality]):
        self.variables = tuple(variables)
        self.rows = self._dedup(rows)

    @staticmethod
    def _dedup(rows: Iterable[Inequality]) -> tuple[Inequality, ...]:
        best: dict[tuple, Bound] = {}
        order: list[tuple] = []
        for row in rows:
            if not row.coeffs:
                if row.bound < 0:
                    # Constant contradiction; keep one marker row.
                    best[()] = row.bound
                    if () not in order:
                        order.append(())
                continue
            key = row.coeffs
            if key not in best or row.bound < best[key]:
                if key not in best:
                    order.append(key)
                best[key] = row.bound
        return tuple(Inequality(key, best[key]) for key in order)

    @staticmethod
    def from_domain(domain: FiringDomain) -> "LinearSystem":
        rows = []
        names = (None,) + domain.variables
        n = len(names)
        one = Fraction(1)
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                b = domain.entries[i][j]
                if b is INF:
                    continue
                coeffs = []
                if names[i] is not None:
                    coeffs.append((names[i], one))
                if names[j] is not None:
                    coeffs.append((names[j], -one))
                rows.append(Inequality(tuple(sorted(coeffs)), b))
        return LinearSystem(domain.variables, rows)

    def eliminate(self, var: str) -> "LinearSystem":
        """Fourier-Motzkin elimination of ``var``.

        Rows are normalized so the pivot coefficient is +1 or -1, then
        every lower/upper pair combines into a pivot-free row.  The
        projection has the same solutions over the remaining variables.
        """
        lowers, uppers, others = [], [], []
        for row in self.rows:
            coeff = dict(row.coeffs).get(var)
            if coeff is None:
                others.append(row)
                continue
            scaled = _scale(row, abs(coeff))
            if coeff > 0:
                uppers.append(scaled)
            else:
                lowers.append(scaled)
        combined = list(others)
        for low in lowers:
            for up in uppers:
                combined.append(_combine(low, up, var))
        names = tuple(v for v in self.variables if v != var)
        return LinearSystem(names, combined)

    def satisfiable_constants(self) -> bool:
        """False when some variable-free row reads ``0 <= negative``."""
        return all(row.coeffs or row.bound >= 0 for row in self.rows)

    def to_domain(self, order: Sequence[str] | None = None) -> FiringDomain:
        """Rebuild a DBM; only unary and difference rows may remain."""
        if not self.satisfiable_constants():
            raise UnsatisfiableError("constant contradiction in linear system")
        names = tuple(order) if order is not None else self.variables
        index = {v: k for k, v in enumerate(names, start=1)}
        m = _fresh_matrix(len(names))
        for row in self.rows:
            if not row.coeffs:
                continue
            pos = [v for v, c in row.coeffs if c == 1]
            neg = [v for v, c in row.coeffs if c == -1]
            if len(pos) + len(neg) != len(row.coeffs) or len(pos) > 1 or len(neg) > 1:
                raise ValueError(f"row is not a difference constraint: {row}")
            i = index[pos[0]] if pos else 0
            j = index[neg[0]] if neg else 0
            if m[i][j] > row.bound:
                m[i][j] = row.bound
        return FiringDomain(names, _freeze(m))


def _scale(row: Inequality, factor: Fraction) -> Inequality:
    if factor == 1:
        return row
    inv = Fraction(1) / factor
    coeffs = tuple((v, c * inv) for v, c in row.coeffs)
    bound = row.bound if row.bound is INF else row.bound * inv
    return Inequality(coeffs, bound)


def _combine(low: Inequality, up: Inequality, var: str) -> Inequality:
    acc: dict[str, Fraction] = {}
    for v, c in low.coeffs + up.coeffs:
        if v == var:
            continue
        acc[v] = acc.get(v, Fraction(0)) + c
    coeffs = tuple(sorted((v, c) for v, c in acc.items() if c != 0))
    return Inequality(coeffs, low.bound + up.bound)


def substitute_shift(domain: FiringDomain, pivot: str) -> LinearSystem:
    """Rewrite every other variable ``v`` as ``pivot + v'``.

    The returned system keeps the original names for the primed
    variables (the renaming is a bijection) and adds the implicit
    ``v' >= 0`` rows for them.  Solution sets are in bijection with the
    input domain's.
    """
    if pivot not in domain.variables:
        raise UnknownVariableError(f"no variable {pivot!r} in domain")
    base = LinearSystem.from_domain(domain)
    one = Fraction(1)
    rows = []
    for row in base.rows:
        extra = Fraction(0)
        coeffs = []
        for v, c in row.coeffs:
            coeffs.append((v, c))
            if v != pivot:
                extra += c
        if extra != 0:
            merged = dict(coeffs)
            merged[pivot] = merged.get(pivot, Fraction(0)) + extra
            coeffs = [(v, c) for v, c in merged.items() if c != 0]
        rows.append(Inequality(tuple(sorted(coeffs)), row.bound))
    for v in domain.variables:
        if v != pivot:
            rows.append(Inequality(((v, -one),), Fraction(0)))
    return LinearSystem(domain.variables, rows)


# -- constraint graph -------------------------------------------------


def constraint_graph_dot(domain: FiringDomain, title: str = "domain") -> str:
    """DOT rendering of the constraint graph (finite edges only)."""
    lines = [f'digraph "{title}" {{', "  rankdir=LR;", f'  "{ZERO_REF}" [shape=doublecircle];']
    for v in domain.variables:
        lines.append(f'  "{v}" [shape=circle];')
    names = (ZERO_REF,) + domain.variables
    n = len(names)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            b = domain.entries[i][j]
            if b is INF:
                continue
            lines.append(f'  "{names[i]}" -> "{names[j]}" [label="{b}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
