"""Exact certification that the degree/weight inequality systems behind
the lower-bound constructions have no solution.

Everything that matters is computed over Fractions: interval endpoints,
grid coordinates, and point evaluations, so no rounding can creep into
a certificate.  Each system is a box of variables plus constraints of
the form expression >= 0 ("ge") or expression > 0 ("gt").

The certifier runs interval branch and bound.  Strict constraints are
tightened to "expression >= margin" first: several of the systems touch
feasibility exactly on the boundary excluded by a strict bound (for
example the closure of the first system is satisfied at a single corner
with x + y + z = 1), and no interval subdivision can rule out an open
condition at its own boundary.  A certificate therefore covers the
closed, margin-tightened system; any solution of the original strict
system would have to clear some strict bound by less than the margin.
Midpoints are still tested exactly against the original strict system,
so a reported feasible point genuinely solves it.

A node first tries to discard its whole box with a single constraint
whose enclosure lies below the cut.  If that fails, provably infeasible
slabs are shaved off the box's faces, each slab becoming a certificate
leaf of its own, discarded by the single constraint that kills it; the
shaving is what lets the search pin coordinates against curved
constraint boundaries without spending bisection depth on them.  What
survives is bisected along its widest side.  Floating point is used
only to steer which slabs to try; every recorded leaf is re-verified in
exact arithmetic before it is kept.

The grid scanner reports the minimum constraint violation over a full
lattice, pruning grid-aligned blocks with the same interval enclosures,
so it is exhaustive without visiting every lattice point.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

F = Fraction

SMALL = Fraction(1, 10**12)  # violation assigned to exact strict-boundary hits


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    def __add__(self, other: "Interval") -> "Interval":
        return Interval(self.lo + other.lo, self.hi + other.hi)

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other: "Interval") -> "Interval":
        return self + (-other)

    def __mul__(self, other: "Interval") -> "Interval":
        prods = (self.lo * other.lo, self.lo * other.hi,
                 self.hi * other.lo, self.hi * other.hi)
        return Interval(min(prods), max(prods))

    def intersect(self, other: "Interval") -> "Interval":
        return Interval(max(self.lo, other.lo), min(self.hi, other.hi))

    @staticmethod
    def point(v) -> "Interval":
        v = Fraction(v)
        return Interval(v, v)


class Expr:
    """Tiny arithmetic AST over named variables and rational constants."""

    def __add__(self, other):
        return Add((self, _lift(other)))

    def __radd__(self, other):
        return _lift(other) + self

    def __sub__(self, other):
        return Add((self, Mul((Num(F(-1)), _lift(other)))))

    def __rsub__(self, other):
        return _lift(other) - self

    def __mul__(self, other):
        return Mul((self, _lift(other)))

    def __rmul__(self, other):
        return _lift(other) * self

    def __neg__(self):
        return Mul((Num(F(-1)), self))

    def interval(self, env: Dict[str, Interval]) -> Interval:
        raise NotImplementedError

    def finterval(self, fenv: Dict[str, tuple]) -> tuple:
        """Float enclosure (lo, hi); steering only, never trusted.  The
        environment may hold plain floats or numpy arrays (one row per
        candidate box), in which case the result broadcasts."""
        raise NotImplementedError

    def value(self, point: Dict[str, Fraction]) -> Fraction:
        raise NotImplementedError

    def monomials(self) -> Dict[tuple, Fraction]:
        """Expanded form: map from a sorted tuple of variable names
        (with multiplicity) to the rational coefficient."""
        raise NotImplementedError


def _lift(v) -> Expr:
    if isinstance(v, Expr):
        return v
    return Num(F(v))


@dataclass(frozen=True)
class Num(Expr):
    c: Fraction

    def interval(self, env):
        return Interval.point(self.c)

    def finterval(self, fenv):
        f = float(self.c)
        return (f, f)

    def value(self, point):
        return self.c

    def monomials(self):
        return {(): self.c}


@dataclass(frozen=True)
class Var(Expr):
    name: str

    def interval(self, env):
        return env[self.name]

    def finterval(self, fenv):
        return fenv[self.name]

    def value(self, point):
        return point[self.name]

    def monomials(self):
        return {(self.name,): F(1)}


@dataclass(frozen=True)
class Add(Expr):
    terms: tuple

    def interval(self, env):
        out = Interval.point(0)
        for t in self.terms:
            out = out + t.interval(env)
        return out

    def finterval(self, fenv):
        lo = hi = 0.0
        for t in self.terms:
            a, b = t.finterval(fenv)
            lo += a
            hi += b
        return (lo, hi)

    def value(self, point):
        return sum((t.value(point) for t in self.terms), F(0))

    def monomials(self):
        out: Dict[tuple, Fraction] = {}
        for t in self.terms:
            for mono, c in t.monomials().items():
                out[mono] = out.get(mono, F(0)) + c
        return {m: c for m, c in out.items() if c}


@dataclass(frozen=True)
class Mul(Expr):
    factors: tuple

    def interval(self, env):
        out = Interval.point(1)
        for f in self.factors:
            out = out * f.interval(env)
        return out

    def finterval(self, fenv):
        lo, hi = 1.0, 1.0
        for f in self.factors:
            a, b = f.finterval(fenv)
            p1, p2, p3, p4 = lo * a, lo * b, hi * a, hi * b
            lo = np.minimum(np.minimum(p1, p2), np.minimum(p3, p4))
            hi = np.maximum(np.maximum(p1, p2), np.maximum(p3, p4))
        return (lo, hi)

    def value(self, point):
        out = F(1)
        for f in self.factors:
            out *= f.value(point)
        return out

    def monomials(self):
        out = {(): F(1)}
        for f in self.factors:
            nxt: Dict[tuple, Fraction] = {}
            for m1, c1 in out.items():
                for m2, c2 in f.monomials().items():
                    m = tuple(sorted(m1 + m2))
                    nxt[m] = nxt.get(m, F(0)) + c1 * c2
            out = nxt
        return {m: c for m, c in out.items() if c}


@dataclass
class Constraint:
    """expression >= 0 when kind == "ge"; expression > 0 when "gt"."""

    name: str
    expr: Expr
    kind: str = "ge"

    def __post_init__(self):
        if self.kind not in ("ge", "gt"):
            raise ValueError(f"unknown constraint kind {self.kind!r}")
        self._poly = self.expr.monomials()
        # per variable: degree -> [(coefficient, remaining names)], the
        # grouping behind the centered (mean value) enclosures
        self._groups: Dict[str, dict] = {}
        for v in sorted({n for mono in self._poly for n in mono}):
            g: dict = {}
            for mono, c in self._poly.items():
                k = mono.count(v)
                g.setdefault(k, []).append((c, tuple(n for n in mono if n != v)))
            self._groups[v] = g

    def _poly_interval(self, env: Dict[str, Interval]) -> Interval:
        out = Interval.point(0)
        for mono, c in self._poly.items():
            term = Interval.point(c)
            for name in mono:
                term = term * env[name]
            out = out + term
        return out

    def _deriv_interval(self, v: str, env: Dict[str, Interval]) -> Interval:
        """Enclosure of the v-derivative over the box."""
        iv = env[v]
        out = Interval.point(0)
        for k, terms in self._groups[v].items():
            if k == 0:
                continue
            for coef, rest in terms:
                term = Interval.point(F(k) * coef)
                for name in rest:
                    term = term * env[name]
                for _ in range(k - 1):
                    term = term * iv
                out = out + term
        return out

    def _centered_interval(self, v: str, env: Dict[str, Interval]) -> Interval:
        """Mean value enclosure around v's midpoint: the expression at
        v = c plus the v-derivative's enclosure times (v - c).  Sharper
        than the direct forms when v occurs in several factors, because
        the first-order dependence on v cancels exactly."""
        iv = env[v]
        c = (iv.lo + iv.hi) / 2
        half = Interval(-(iv.hi - iv.lo) / 2, (iv.hi - iv.lo) / 2)
        at_c = Interval.point(0)
        for k, terms in self._groups[v].items():
            ck = c ** k
            for coef, rest in terms:
                base = Interval.point(coef * ck)
                for name in rest:
                    base = base * env[name]
                at_c = at_c + base
        return at_c + self._deriv_interval(v, env) * half

    def _mean_value_interval(self, env: Dict[str, Interval]) -> Interval:
        """Mean value enclosure around the box midpoint in all
        variables at once: the value at the center plus each partial
        derivative's enclosure times that variable's offset range.
        This is the form that sees joint cancellations: where several
        near-tight terms balance, the center value is small and the
        slop is only the gradient times the half-widths."""
        mid = {v: (iv.lo + iv.hi) / 2 for v, iv in env.items()}
        out = Interval.point(self.value(mid))
        for v in self._groups:
            iv = env[v]
            h = (iv.hi - iv.lo) / 2
            if h == 0:
                continue
            out = out + self._deriv_interval(v, env) * Interval(-h, h)
        return out

    def quick_interval(self, env: Dict[str, Interval]) -> Interval:
        """Enclosure from the factored form intersected with the
        expanded polynomial; cheap but loose when a variable repeats."""
        return self.expr.interval(env).intersect(self._poly_interval(env))

    def interval(self, env: Dict[str, Interval]) -> Interval:
        """Sharpest available enclosure: the direct forms intersected
        with the mean value form and every variable's centered form."""
        out = self.quick_interval(env).intersect(self._mean_value_interval(env))
        for v in self._groups:
            out = out.intersect(self._centered_interval(v, env))
        return out

    def proves(self, env: Dict[str, Interval], cut: Fraction,
               strict: bool = True) -> bool:
        """Whether some enclosure form puts the expression below cut
        (at most cut when strict is False) on the whole box;
        short-circuits across forms."""
        ok = ((lambda hi: hi < cut) if strict else (lambda hi: hi <= cut))
        if ok(self.expr.interval(env).hi):
            return True
        if ok(self._poly_interval(env).hi):
            return True
        if ok(self._mean_value_interval(env).hi):
            return True
        return any(ok(self._centered_interval(v, env).hi)
                   for v in self._groups)

    def value(self, point: Dict[str, Fraction]) -> Fraction:
        return self.expr.value(point)

    def holds_at(self, point: Dict[str, Fraction]) -> bool:
        v = self.value(point)
        return v > 0 if self.kind == "gt" else v >= 0


class _FloatKernel:
    """Batched float upper bounds for a list of constraints.

    Rows of (lo, hi) arrays describe candidate boxes; ``sups`` returns
    one upper bound per box and constraint, the smallest over the same
    enclosure forms the exact evaluation uses (factored, expanded
    polynomial, and one centered form per variable).  Output steers
    shaving and splitting only; nothing it reports is recorded without
    exact confirmation."""

    def __init__(self, variables: tuple, constraints: Sequence["Constraint"]):
        self.variables = variables
        index = {v: i for i, v in enumerate(variables)}
        self.exprs = [c.expr for c in constraints]
        self.polys = [[(float(coef), tuple(index[n] for n in mono))
                       for mono, coef in c._poly.items()]
                      for c in constraints]
        self.groups = [
            {index[v]: {k: [(float(coef), tuple(index[n] for n in rest))
                            for coef, rest in terms]
                        for k, terms in by_deg.items()}
             for v, by_deg in c._groups.items()}
            for c in constraints
        ]

    @staticmethod
    def _mono(scale_lo, scale_hi, idxs, los, his):
        """Interval product scale * prod(vars at idxs), elementwise."""
        mlo, mhi = scale_lo, scale_hi
        for i in idxs:
            p1, p2 = mlo * los[:, i], mlo * his[:, i]
            p3, p4 = mhi * los[:, i], mhi * his[:, i]
            mlo = np.minimum(np.minimum(p1, p2), np.minimum(p3, p4))
            mhi = np.maximum(np.maximum(p1, p2), np.maximum(p3, p4))
        return mlo, mhi

    def sups(self, los: np.ndarray, his: np.ndarray,
             light: bool = False) -> np.ndarray:
        """(B, dim) bounds in, (B, n_constraints) upper bounds out.
        With ``light`` only the direct forms (factored and expanded
        polynomial) are evaluated, skipping the mean value slop; a
        coarser but cheaper screen."""
        fenv = {v: (los[:, i], his[:, i]) for v, i in
                zip(self.variables, range(los.shape[1]))}
        mids = (los + his) * 0.5
        halfw = (his - los) * 0.5
        nb = los.shape[0]
        out = np.empty((nb, len(self.exprs)))
        for j, (expr, poly) in enumerate(zip(self.exprs, self.polys)):
            acc = np.zeros(nb)
            center = np.zeros(nb)
            for coef, idxs in poly:
                acc = acc + self._mono(coef, coef, idxs, los, his)[1]
                if light:
                    continue
                term = np.full(nb, coef)
                for i in idxs:
                    term = term * mids[:, i]
                center = center + term
            if light:
                out[:, j] = np.minimum(acc, expr.finterval(fenv)[1])
                continue
            best = np.minimum(acc, expr.finterval(fenv)[1])
            slop = np.zeros(nb)
            for i, by_deg in self.groups[j].items():
                dlo = np.zeros(nb)
                dhi = np.zeros(nb)
                for k, terms in by_deg.items():
                    if k == 0:
                        continue
                    for coef, rest in terms:
                        tlo, thi = self._mono(float(k) * coef,
                                              float(k) * coef,
                                              rest, los, his)
                        for _ in range(k - 1):
                            p1, p2 = tlo * los[:, i], tlo * his[:, i]
                            p3, p4 = thi * los[:, i], thi * his[:, i]
                            tlo = np.minimum(np.minimum(p1, p2),
                                             np.minimum(p3, p4))
                            thi = np.maximum(np.maximum(p1, p2),
                                             np.maximum(p3, p4))
                        dlo = dlo + tlo
                        dhi = dhi + thi
                slop = slop + np.maximum(np.abs(dlo), np.abs(dhi)) * halfw[:, i]
            out[:, j] = np.minimum(best, center + slop)
        return out


@dataclass
class System:
    sid: str
    variables: tuple
    box: dict  # name -> (lo, hi) Fractions
    constraints: list
    note: str = ""

    def midpoint(self, box=None) -> dict:
        box = box or self.box
        return {v: (lo + hi) / 2 for v, (lo, hi) in box.items()}

    def holds_at(self, point: Dict[str, Fraction]) -> bool:
        return all(c.holds_at(point) for c in self.constraints)

    def violation_at(self, point: Dict[str, Fraction]) -> Fraction:
        """0 when the point satisfies the system; otherwise the largest
        shortfall, with exact hits of a strict bound counted as SMALL."""
        worst = F(0)
        for c in self.constraints:
            v = c.value(point)
            if c.kind == "ge":
                bad = -v if v < 0 else F(0)
            else:
                bad = max(-v, SMALL) if v <= 0 else F(0)
            worst = max(worst, bad)
        return worst


_X, _Y, _Z, _ZETA, _BETA = (Var(n) for n in ("x", "y", "z", "zeta", "beta"))
_GAMMA = F(4, 3) - _BETA  # the two densities are coupled this way throughout

_UNIT = (F(0), F(1))
_BETA_RANGE = (F(1, 2), F(2, 3))


def _base(sid, variables, extra, note):
    cons = [Constraint("sum", 1 - _X - _Y - _Z, "gt"),
            Constraint("x-lb", _X - F(1, 3))]
    cons.extend(extra)
    box = {v: (_BETA_RANGE if v == "beta" else _UNIT) for v in variables}
    return System(sid, tuple(variables), box, cons, note)


def lemma_system(sid: str) -> System:
    """The five inequality systems whose infeasibility underpins the
    lower-bound constructions, plus the control system "B1w" (B1 with
    its y-bound dropped to y >= 0), which is feasible.

    Every solution of the unrestricted systems already lies in the unit
    box: the lower bounds force x, y, z >= 0 and the strict sum bound
    then caps each variable by 1.  In B5 the final constraint is
    non-increasing in zeta (its zeta-coefficient 2(2*beta - x - 1) is
    never positive on the box), so any solution yields one with
    zeta = 1/2 - y <= 1/3; searching zeta in [0, 1] therefore decides
    the unbounded system as well.
    """
    main_b1 = (1 - _GAMMA) * (_Z - _BETA + F(1, 2)) - (F(1, 2) - _Z) * (_BETA - _X)
    if sid == "B1":
        return _base(sid, ("x", "y", "z", "beta"), [
            Constraint("y-lb", _Y - F(1, 2)),
            Constraint("z-lb", _Z - _BETA + F(1, 2)),
            Constraint("main", main_b1),
        ], "one part of the link pool is large")
    if sid == "B1w":
        return _base(sid, ("x", "y", "z", "beta"), [
            Constraint("y-lb", _Y),
            Constraint("z-lb", _Z - _BETA + F(1, 2)),
            Constraint("main", main_b1),
        ], "control: B1 with the y lower bound removed; feasible")
    if sid == "B2":
        return _base(sid, ("x", "y", "z", "beta"), [
            Constraint("y-lb", _Y - F(5, 12)),
            Constraint("z-lb", _Z - _BETA + F(1, 2)),
            Constraint("main", (1 - _GAMMA) * (1 - _Z) - (1 - _X) * (_BETA - _Z)),
        ], "")
    if sid == "B3":
        return _base(sid, ("x", "y", "z", "beta"), [
            Constraint("y-lb", _Y - F(1, 3)),
            Constraint("z-lb", _Z - _BETA + F(1, 2)),
            Constraint("main-1", (1 - _GAMMA) * (_Z - _BETA + F(1, 2))
                       - (_BETA - _Z) * (F(1, 2) - _Y)),
            Constraint("main-2", (1 - _GAMMA) * (_Z - _BETA + F(1, 2))
                       - (_BETA - _X) * (F(1, 2) - _Z)),
            Constraint("main-3", (1 - _GAMMA) * (1 - _Z) - (1 - _X) * (_BETA - _Z)),
        ], "")
    if sid == "B4":
        return _base(sid, ("x", "y", "z", "beta"), [
            Constraint("y-lb", _Y - _GAMMA + F(1, 2)),
            Constraint("y-ub", F(1, 3) - _Y),
            Constraint("z-lb", _Z - _BETA + F(1, 2)),
            Constraint("main", (1 - _BETA) * (_Y - _GAMMA + F(1, 2))
                       - (_GAMMA - _Y) * (F(1, 2) - _Z)),
        ], "")
    if sid == "B5":
        return _base(sid, ("x", "y", "z", "zeta", "beta"), [
            Constraint("y-lb", _Y - _GAMMA + F(1, 2)),
            Constraint("y-ub", F(1, 3) - _Y),
            Constraint("z-lb", _Z - _BETA + F(1, 4)),
            Constraint("zeta-lb", _ZETA - F(1, 2) + _Y),
            Constraint("main", 2 * (1 - _BETA) * (1 - _GAMMA - _ZETA)
                       - (1 - _Y - 2 * _ZETA) * (_BETA - _X)),
        ], "zeta only needs [0, 1]; see the docstring")
    raise ValueError(f"unknown system {sid!r} (expected B1..B5 or B1w)")


ALL_SYSTEMS = ("B1", "B2", "B3", "B4", "B5")


@dataclass
class FeasiblePoint:
    sid: str
    point: dict
    values: dict


@dataclass
class Certificate:
    """Partition of the box into leaves, each discarded by one named
    pruning constraint whose interval enclosure lies entirely below its
    cut: a system constraint (cut = margin when strict, 0 otherwise) or
    a derived combination of one (see _pruning_constraints)."""

    sid: str
    margin: Fraction
    leaves: list  # ((name, (lo, hi)), ...) sorted box items + constraint name
    nodes: int
    depth: int
    millis: float
    box_volume: Fraction

    def verify(self, system: Optional[System] = None) -> bool:
        system = system or lemma_system(self.sid)
        cons = {c.name: (c, cut)
                for c, cut in _pruning_constraints(system, self.margin)}
        vol = F(0)
        for items, cname in self.leaves:
            box = dict(items)
            if set(box) != set(system.variables):
                return False
            env = {}
            piece = F(1)
            for v, (lo, hi) in box.items():
                rlo, rhi = system.box[v]
                if not (rlo <= lo <= hi <= rhi):
                    return False
                env[v] = Interval(lo, hi)
                piece *= hi - lo
            vol += piece
            c, cut = cons[cname]
            if not c.interval(env).hi < cut:
                return False
        root = F(1)
        for v, (lo, hi) in system.box.items():
            root *= hi - lo
        return vol == root == self.box_volume


class DepthExhaustedError(Exception):
    def __init__(self, sid, box, depth):
        super().__init__(
            f"{sid}: box undecided at depth {depth}: "
            + ", ".join(f"{v} in [{lo}, {hi}]" for v, (lo, hi) in sorted(box.items())))
        self.sid = sid
        self.box = box
        self.depth = depth


_SHAVE_RES = 16  # dyadic resolution when shaving a face
_FUZZ = 1e-9  # float slack below which a probe is confirmed exactly
_GRID = 6 * 2**40  # global denominator shave cuts are snapped to

_COMBO_WEIGHTS = (F(1, 6), F(1, 4), F(1, 3), F(1, 2), F(1))


def _pruning_constraints(system: System, margin: Fraction) -> list:
    """The constraints a certificate may prune with, as (constraint,
    cut) pairs: every system constraint (cut = margin for strict ones,
    0 otherwise) plus derived combinations c + w*s for each nonlinear
    constraint c and strict constraint s, with cut w*margin.

    The combinations are sound consequences: a point of the tightened
    system satisfies c >= cut_c and s >= margin, hence c + w*s >=
    cut_c + w*margin.  They matter where infeasibility is only joint:
    near a corner where several constraints are simultaneously tight,
    the weighted sum cancels the offending linear terms and its
    enclosure goes negative on boxes far wider than the margin, which
    single constraints cannot do there."""
    out = [(c, margin if c.kind == "gt" else F(0)) for c in system.constraints]
    for s in system.constraints:
        if s.kind != "gt":
            continue
        for c in system.constraints:
            if c is s or all(len(m) < 2 for m in c._poly):
                continue
            base_cut = margin if c.kind == "gt" else F(0)
            for w in _COMBO_WEIGHTS:
                name = f"{c.name}+{w}*{s.name}"
                out.append((Constraint(name, c.expr + w * s.expr, "ge"),
                            base_cut + w * margin))
    return out


def certify_infeasible(system, max_depth: int = 40,
                       margin: Fraction = Fraction(1, 10**6)):
    """Certificate that the system has no solution, or a FeasiblePoint.

    Interval branch and bound over the system's box.  Strict constraints
    are tightened by ``margin`` (see the module docstring); each leaf is
    a sub-box on which one named constraint's exact enclosure stays
    below its cut, so the certificate proves the tightened closed system
    empty.  Exact midpoints of surviving boxes are tested against the
    original strict system, so a returned FeasiblePoint genuinely solves
    it.

    Depth counts bisections per axis: a box at depth d has been halved
    at most d times in any single direction, so its sides are at least
    2^-d of the root box's (before face shaving, which does not count
    toward depth).  Once every positive-width axis of an undecided box
    has been halved ``max_depth`` times, DepthExhaustedError is raised.
    """
    if isinstance(system, str):
        system = lemma_system(system)
    start = time.monotonic()
    pruning = _pruning_constraints(system, margin)
    leaves: list = []
    state = {"nodes": 0, "depth": 0}

    kernel = _FloatKernel(system.variables, [c for c, _ in pruning])
    fcut_arr = np.array([float(cut) for _, cut in pruning])
    order = system.variables
    dim = len(order)

    def exact_eliminator(box: dict, hint: Optional[int] = None) -> Optional[str]:
        """Name of a pruning constraint whose exact enclosure is below
        its cut on the whole box, or None.  ``hint`` is tried first."""
        env = {v: Interval(lo, hi) for v, (lo, hi) in box.items()}
        pairs = list(pruning)
        if hint is not None:
            pairs.insert(0, pairs.pop(hint))
        for c, cut in pairs:
            if c.proves(env, cut):
                return c.name
        return None

    def _as_arrays(box: dict):
        lo = np.array([float(box[v][0]) for v in order])
        hi = np.array([float(box[v][1]) for v in order])
        return lo, hi

    def eliminator(box: dict) -> Optional[str]:
        """Like exact_eliminator but float-screened first."""
        flo, fhi = _as_arrays(box)
        sups = kernel.sups(flo[None, :], fhi[None, :])[0]
        screened = np.flatnonzero(sups < fcut_arr + _FUZZ)
        if screened.size == 0:
            return None
        return exact_eliminator(box, hint=int(screened[0]))

    def _slab_batch(flo, fhi):
        """All candidate face slabs at dyadic prefixes: row arrays plus
        (axis, side, numerator) labels.  numerator/_SHAVE_RES of the
        width is removed from the low (side 0) or high (side 1) end."""
        rows_lo, rows_hi, labels = [], [], []
        for i in range(dim):
            w = fhi[i] - flo[i]
            if w <= 0.0:
                continue
            for side in (0, 1):
                for num in range(1, _SHAVE_RES):
                    rlo, rhi = flo.copy(), fhi.copy()
                    if side == 0:
                        rhi[i] = flo[i] + w * (num / _SHAVE_RES)
                    else:
                        rlo[i] = fhi[i] - w * (num / _SHAVE_RES)
                    rows_lo.append(rlo)
                    rows_hi.append(rhi)
                    labels.append((i, side, num))
        return rows_lo, rows_hi, labels

    def _dead_prefixes(flo, fhi):
        """Largest float-dead slab numerator per (axis, side), plus the
        index of the constraint that screened it."""
        rows_lo, rows_hi, labels = _slab_batch(flo, fhi)
        if not labels:
            return {}
        sups = kernel.sups(np.array(rows_lo), np.array(rows_hi))
        dead = sups < fcut_arr + _FUZZ
        rows_dead = dead.any(axis=1)
        best: dict = {}
        for row, (i, side, num) in enumerate(labels):
            if rows_dead[row] and num > best.get((i, side), (0, 0))[0]:
                best[(i, side)] = (num, int(np.flatnonzero(dead[row])[0]))
        return best

    def shave(box: dict) -> bool:
        """Peel provably infeasible slabs off the faces of ``box`` in
        place, recording each slab as a leaf.  Candidate slabs at all
        dyadic prefixes of every face are float-screened in one batch
        per round; the largest surviving candidate of each face is
        confirmed exactly before anything is committed.  A slab located
        against a sibling face that shrank earlier in the same round is
        still sound: it was screened on a superset of the current box.
        Returns whether anything was removed."""
        changed = False
        for _ in range(16):
            flo, fhi = _as_arrays(box)
            best = _dead_prefixes(flo, fhi)
            round_changed = False
            for (i, side), (num, hint) in sorted(best.items()):
                v = order[i]
                lo, hi = box[v]
                w = hi - lo
                if w == 0:
                    continue
                piece = name = None
                while num >= 2:  # slivers under 1/8 of the face: split instead
                    # snap the cut to the global grid so endpoint
                    # denominators stay bounded across rounds
                    if side == 0:
                        cut = F((lo + w * F(num, _SHAVE_RES)) * _GRID // 1, _GRID)
                        cand = (lo, cut) if cut > lo else None
                    else:
                        raw = hi - w * F(num, _SHAVE_RES)
                        cut = F(-((-raw) * _GRID // 1), _GRID)
                        cand = (cut, hi) if cut < hi else None
                    if cand is not None:
                        leaf = dict(box)
                        leaf[v] = cand
                        name = exact_eliminator(leaf, hint)
                        if name is not None:
                            piece = cand
                            break
                    num //= 2  # float screen was optimistic; retry smaller
                if piece is None:
                    continue
                leaf = dict(box)
                leaf[v] = piece
                leaves.append((tuple(sorted(leaf.items())), name))
                box[v] = (piece[1], hi) if side == 0 else (lo, piece[0])
                round_changed = True
                changed = True
            if not round_changed:
                break
        return changed

    def witness(box: dict) -> Optional[FeasiblePoint]:
        """Exact test of the box midpoint and corners against the
        original strict system.  Corners matter: when the feasible set
        is a thin wedge against a face, centers stay on the wrong side
        of a curved boundary at every depth."""
        points = [system.midpoint(box)]
        corners = [{}]
        for v in order:
            lo, hi = box[v]
            ends = (lo,) if lo == hi else (lo, hi)
            corners = [dict(c, **{v: e}) for c in corners for e in ends]
        points.extend(corners)
        for p in points:
            if system.holds_at(p):
                return FeasiblePoint(system.sid, p,
                                     {c.name: c.value(p) for c in system.constraints})
        return None

    def split_var(box: dict, allowed: list) -> str:
        widths = {v: hi - lo for v, (lo, hi) in box.items()}
        return max(allowed, key=lambda u: widths[u])

    undecided: list = []

    def rec(box: dict, splits: dict):
        state["nodes"] += 1
        state["depth"] = max(state["depth"], *splits.values())
        box = dict(box)
        while True:
            name = eliminator(box)
            if name is not None:
                leaves.append((tuple(sorted(box.items())), name))
                return None
            hit = witness(box)
            if hit is not None:
                return hit
            if not shave(box):
                break
        allowed = [v for v in system.variables
                   if splits[v] < max_depth and box[v][1] > box[v][0]]
        if not allowed:
            # keep searching: a sibling may still hold a witness, and
            # only a witness-free run has to give up
            undecided.append(box)
            if len(undecided) >= 64:
                raise DepthExhaustedError(system.sid, undecided[0], max_depth)
            return None
        v = split_var(box, allowed)
        lo, hi = box[v]
        m = (lo + hi) / 2
        child_splits = dict(splits)
        child_splits[v] += 1
        for piece in ((lo, m), (m, hi)):
            child = dict(box)
            child[v] = piece
            res = rec(child, child_splits)
            if res is not None:
                return res
        return None

    found = rec(dict(system.box), {v: 0 for v in system.variables})
    millis = (time.monotonic() - start) * 1000.0
    if found is not None:
        return found
    if undecided:
        raise DepthExhaustedError(system.sid, undecided[0], max_depth)
    volume = F(1)
    for v, (lo, hi) in system.box.items():
        volume *= hi - lo
    covered = F(0)
    for items, _ in leaves:
        piece = F(1)
        for _, (lo, hi) in items:
            piece *= hi - lo
        covered += piece
    if covered != volume:
        raise AssertionError(
            f"{system.sid}: leaves cover {covered} of {volume}; the recursion "
            "should partition the box exactly")
    leaves.sort()
    return Certificate(system.sid, margin, leaves, state["nodes"],
                       state["depth"], millis, volume)


@dataclass
class GridScanResult:
    sid: str
    resolution: int
    min_violation: Fraction
    argmin: dict
    nodes: int
    millis: float


def grid_scan(system, resolution: int) -> GridScanResult:
    """Exact minimum of the constraint violation over the full lattice
    with ``resolution`` steps per axis (so (resolution+1)^dim points).

    Equivalent to evaluating every lattice point, but grid-aligned
    blocks are pruned with the interval bound: once a constraint's
    enclosure sits far enough below zero on a block, no point inside
    can violate by less than the current best.  Float bounds pick
    which blocks are worth an exact pruning test and which child to
    descend first; a block is only ever discarded after an exact
    enclosure confirms it.  Exact hits of strict bounds count as the
    tiny positive SMALL, so a positive result still certifies that no
    lattice point is feasible.
    """
    if isinstance(system, str):
        system = lemma_system(system)
    if resolution < 1:
        raise ValueError("resolution must be at least 1")
    start = time.monotonic()
    coords = {}
    fcoords = {}
    for v, (lo, hi) in system.box.items():
        step = (hi - lo) / resolution
        coords[v] = [lo + step * i for i in range(resolution + 1)]
        fcoords[v] = np.array([float(c) for c in coords[v]])
    kernel = _FloatKernel(system.variables, system.constraints)
    best = {"viol": None, "arg": None, "nodes": 0, "hint": 0}

    def fbounds(blocks: list) -> np.ndarray:
        # Upper estimate of how far below zero any constraint can be
        # pushed on each block; the 1e-9 fuzz keeps blocks whose sup
        # is a hair above zero in play, since their exact sup may be
        # exactly zero and still prune a strict constraint.
        los = np.array([[fcoords[v][idx[v][0]] for v in system.variables]
                        for idx in blocks])
        his = np.array([[fcoords[v][idx[v][1]] for v in system.variables]
                        for idx in blocks])
        sups = kernel.sups(los, his, light=True)
        return np.clip(1e-9 - sups, 0.0, None).max(axis=1)

    def exact_prunes(idx: dict, target: Fraction) -> bool:
        env = {v: Interval(coords[v][a], coords[v][b])
               for v, (a, b) in idx.items()}
        order = list(range(len(system.constraints)))
        order.insert(0, order.pop(best["hint"]))
        for j in order:
            c = system.constraints[j]
            cut = -target
            if c.kind == "gt" and target <= SMALL:
                cut = F(0)
            if c.proves(env, cut, strict=False):
                best["hint"] = j
                return True
        return False

    def rec(idx: dict, fb) -> None:
        best["nodes"] += 1
        if best["viol"] is not None and best["viol"] == 0:
            return
        widths = {v: b - a for v, (a, b) in idx.items()}
        v = max(system.variables, key=lambda u: widths[u])
        if widths[v] == 0:
            point = {u: coords[u][a] for u, (a, b) in idx.items()}
            viol = system.violation_at(point)
            if best["viol"] is None or viol < best["viol"]:
                best["viol"] = viol
                best["arg"] = point
            return
        if best["viol"] is not None:
            if fb is None:
                fb = fbounds([idx])[0]
            if fb >= float(best["viol"]) * (1 - 1e-9) - 1e-15:
                if exact_prunes(idx, best["viol"]):
                    return
        a, b = idx[v]
        m = (a + b) // 2
        children = []
        for piece in ((a, m), (m + 1, b)):
            child = dict(idx)
            child[v] = piece
            children.append(child)
        if best["viol"] is not None:
            fbs = fbounds(children)
            pairs = sorted(zip(fbs, children), key=lambda t: t[0])
            for fbc, child in pairs:
                rec(child, fbc)
        else:
            for child in children:
                rec(child, None)

    rec({v: (0, resolution) for v in system.variables}, None)
    millis = (time.monotonic() - start) * 1000.0
    return GridScanResult(system.sid, resolution, best["viol"], best["arg"],
                          best["nodes"], millis)
