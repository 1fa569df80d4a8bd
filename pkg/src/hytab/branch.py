"""The tableau branch: a cumulative set of formulas with an equational
closure maintained incrementally.

A branch never deletes or rewrites formulas.  Nominal equations are folded
into a disjoint-set structure; all label/edge/disequation indexes are keyed
by class representatives, so closure queries (is this formula entailed
modulo the nominal equivalence?) are dictionary lookups.  The class
representative is the member with the lowest creation index, which also
serves as the state name in model extraction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Optional, Union

from .syntax import (
    Box, Dia, Expr, Problem, print_expr, subexpressions, subrole_closure,
)


# ---------------------------------------------------------------------------
# Branch formulas
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Label:
    expr: Expr
    nom: str

    def __str__(self) -> str:
        return f"{print_expr(self.expr)} @ {self.nom}"


@dataclass(frozen=True, slots=True)
class Edge:
    role: str
    src: str
    dst: str

    def __str__(self) -> str:
        return f"{self.role}({self.src}, {self.dst})"


@dataclass(frozen=True, slots=True)
class Eq:
    left: str
    right: str

    def __str__(self) -> str:
        return f"{self.left} = {self.right}"


@dataclass(frozen=True, slots=True)
class Neq:
    left: str
    right: str

    def __str__(self) -> str:
        return f"{self.left} != {self.right}"


class _Falsum:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __str__(self) -> str:
        return "false"

    def __repr__(self) -> str:
        return "FALSUM"


FALSUM = _Falsum()

BranchFormula = Union[Label, Edge, Eq, Neq, _Falsum]


# ---------------------------------------------------------------------------
# Problem-derived static data, shared by all branches of one derivation
# ---------------------------------------------------------------------------

class Statics:
    """Immutable role structure of a problem.

    subroles[r]   -- all r' with r' <=* r (includes r)
    superroles[r] -- all r' with r <=* r'
    reflexive_closed -- roles with a declared-reflexive subrole; edges of
                        such roles implicitly contain the diagonal
    extended      -- whether the derivation runs the extended calculus
                     (any inclusion/reflexivity/transitivity declared)
    expr_order    -- first-occurrence index of every subexpression of the
                     problem's labeled formulas, used to order diamond
                     principals deterministically
    """

    def __init__(self, problem: Problem):
        self.problem = problem
        roles = problem.roles()
        self.roles: tuple[str, ...] = tuple(roles)
        self.subroles = subrole_closure(problem.inclusions, roles)
        self.superroles = {
            r: frozenset(r2 for r2 in roles if r in self.subroles[r2])
            for r in roles
        }
        self.reflexive_closed = frozenset(
            r for r in roles
            if any(sub in problem.reflexive for sub in self.subroles[r])
        )
        self.extended = bool(
            problem.inclusions or problem.reflexive or problem.transitive
        )
        order: dict[Expr, int] = {}
        for e, _ in problem.labels:
            for sub in subexpressions(e):
                order.setdefault(sub, len(order))
        self.expr_order = order


# ---------------------------------------------------------------------------
# Branch
# ---------------------------------------------------------------------------

FRESH_PREFIX = "v"


class Branch:
    """Single-writer mutable branch.  ``snapshot()`` yields an independent
    copy; sibling branches share only the immutable statics."""

    def __init__(self, statics: Statics):
        self.statics = statics
        self.formulas: list[BranchFormula] = []
        self._formula_set: set[BranchFormula] = set()
        self._parent: dict[str, str] = {}
        self._created: dict[str, int] = {}     # nominal -> creation index
        self._labels: dict[str, set[Expr]] = {}     # rep -> closure labels
        self._out: dict[str, dict[str, set[str]]] = {}   # rep -> role -> target reps
        self._in: dict[str, dict[str, set[str]]] = {}    # rep -> role -> source reps
        self._diseq: dict[str, set[str]] = {}  # rep -> disequated reps (symmetric)
        self.closed = False
        self._fresh_counter = 0
        self.steps = 0     # rule applications on the path to this branch
        self.on_event: Optional[Callable[..., None]] = None

    # -- construction ---------------------------------------------------

    @classmethod
    def initial(cls, problem: Problem) -> "Branch":
        """The initial branch: the problem's labeled formulas, edges,
        equations and disequations, in that order."""
        b = cls(Statics(problem))
        for nom in problem.nominals():
            b._register(nom)
        for e, x in problem.labels:
            b.add(Label(e, x))
        for r, x, y in problem.edges:
            b.add(Edge(r, x, y))
        for x, y in problem.equations:
            b.add(Eq(x, y))
        for x, y in problem.disequations:
            b.add(Neq(x, y))
        return b

    def snapshot(self) -> "Branch":
        c = Branch(self.statics)
        c.formulas = list(self.formulas)
        c._formula_set = set(self._formula_set)
        c._parent = dict(self._parent)
        c._created = dict(self._created)
        c._labels = {k: set(v) for k, v in self._labels.items()}
        c._out = {k: {r: set(t) for r, t in d.items()} for k, d in self._out.items()}
        c._in = {k: {r: set(t) for r, t in d.items()} for k, d in self._in.items()}
        c._diseq = {k: set(v) for k, v in self._diseq.items()}
        c.closed = self.closed
        c._fresh_counter = self._fresh_counter
        c.steps = self.steps
        c.on_event = self.on_event
        return c

    # -- nominals and classes --------------------------------------------

    def _register(self, nom: str) -> None:
        if nom not in self._created:
            self._created[nom] = len(self._created)
            self._parent[nom] = nom
            self._labels[nom] = set()
            self._out[nom] = {}
            self._in[nom] = {}
            self._diseq[nom] = set()

    def find(self, nom: str) -> str:
        """Class representative (lowest creation index in the class)."""
        if nom not in self._parent:
            return nom
        root = nom
        while self._parent[root] != root:
            root = self._parent[root]
        while self._parent[nom] != root:
            self._parent[nom], nom = root, self._parent[nom]
        return root

    def nominals(self) -> list[str]:
        """All nominals on the branch, in creation order."""
        return list(self._created)

    def class_reps(self) -> list[str]:
        """One representative per equivalence class, in creation order."""
        return [n for n in self._created if self.find(n) == n]

    def created_index(self, nom: str) -> int:
        return self._created[nom]

    def equivalent(self, x: str, y: str) -> bool:
        if x == y:
            return True
        if x not in self._created or y not in self._created:
            return False
        return self.find(x) == self.find(y)

    def _union(self, x: str, y: str) -> None:
        fx, fy = self.find(x), self.find(y)
        if fx == fy:
            return
        keep, drop = (fx, fy) if self._created[fx] < self._created[fy] else (fy, fx)
        self._parent[drop] = keep

        self._labels[keep] |= self._labels.pop(drop)

        # re-key every edge touching the absorbed representative
        triples: set[tuple[str, str, str]] = set()
        for role, tgts in self._out.pop(drop).items():
            for t in tgts:
                triples.add((role, drop, t))
        for role, srcs in self._in.pop(drop).items():
            for s in srcs:
                triples.add((role, s, drop))
        for role, s, t in triples:
            if s != drop:
                self._out[s][role].discard(drop)
            if t != drop:
                self._in[t][role].discard(drop)
        for role, s, t in triples:
            s2 = keep if s == drop else s
            t2 = keep if t == drop else t
            self._out[s2].setdefault(role, set()).add(t2)
            self._in[t2].setdefault(role, set()).add(s2)

        # re-key disequations likewise; a pair collapsing onto one class is
        # kept as a self-loop (the clash rule fires on the raw formula)
        others = self._diseq.pop(drop)
        for o in others:
            self._diseq[o].discard(drop)
        for o in others:
            o2 = keep if o == drop else o
            self._diseq[keep].add(o2)
            self._diseq[o2].add(keep)

        if self.on_event:
            self.on_event("merge", keep, drop)

    # -- closure queries --------------------------------------------------

    def closure_contains(self, f: BranchFormula) -> bool:
        """Membership in the equational closure: the formula set closed
        under replacing nominals by equivalent ones.  Disequations are
        looked up symmetrically."""
        if isinstance(f, Label):
            if f.nom not in self._created:
                return False
            return f.expr in self._labels[self.find(f.nom)]
        if isinstance(f, Edge):
            if f.src not in self._created or f.dst not in self._created:
                return False
            return self.find(f.dst) in self._out[self.find(f.src)].get(f.role, ())
        if isinstance(f, Eq):
            return self.equivalent(f.left, f.right)
        if isinstance(f, Neq):
            if f.left not in self._created or f.right not in self._created:
                return False
            return self.find(f.right) in self._diseq[self.find(f.left)]
        if isinstance(f, _Falsum):
            return self.closed
        raise TypeError(f"not a branch formula: {f!r}")

    def add(self, f: BranchFormula) -> bool:
        """Insert a formula.  Returns True when the closure strictly grows
        (a proper extension), False when the formula was already entailed."""
        if self.closure_contains(f):
            return False
        self.formulas.append(f)
        self._formula_set.add(f)
        if isinstance(f, Label):
            self._register(f.nom)
            self._labels[self.find(f.nom)].add(f.expr)
        elif isinstance(f, Edge):
            self._register(f.src)
            self._register(f.dst)
            s, t = self.find(f.src), self.find(f.dst)
            self._out[s].setdefault(f.role, set()).add(t)
            self._in[t].setdefault(f.role, set()).add(s)
        elif isinstance(f, Eq):
            self._register(f.left)
            self._register(f.right)
            self._union(f.left, f.right)
        elif isinstance(f, Neq):
            self._register(f.left)
            self._register(f.right)
            l, r = self.find(f.left), self.find(f.right)
            self._diseq[l].add(r)
            self._diseq[r].add(l)
        elif isinstance(f, _Falsum):
            self.closed = True
        else:
            raise TypeError(f"not a branch formula: {f!r}")
        if self.on_event:
            self.on_event("add", f)
        return True

    def pairwise_distinct(self, noms: Iterable[str]) -> bool:
        """True iff every two distinct members fall into distinct classes
        separated by a disequation on the branch (in either orientation)."""
        reps = [self.find(n) for n in noms]
        for a, b in itertools.combinations(reps, 2):
            if a == b:
                return False
            if b not in self._diseq[a]:
                return False
        return True

    def labels_of(self, nom: str) -> frozenset[Expr]:
        """All expressions labelling the class of nom in the closure."""
        if nom not in self._created:
            return frozenset()
        return frozenset(self._labels[self.find(nom)])

    def raw_successors(self, nom: str, role: str) -> list[str]:
        """Targets of closure edges of exactly this role, as class
        representatives in creation order."""
        if nom not in self._created:
            return []
        tgts = self._out[self.find(nom)].get(role, ())
        return sorted(tgts, key=self._created.__getitem__)

    def has_raw_successor(self, nom: str, role: str) -> bool:
        if nom not in self._created:
            return False
        return bool(self._out[self.find(nom)].get(role))

    def induced_successors(self, nom: str, role: str) -> list[str]:
        """Successors under the induced transition relation: targets of
        closure edges whose role is a subrole of the given one (reflexive-
        transitive inclusion closure).  Class representatives, creation
        order."""
        if nom not in self._created:
            return []
        out = self._out[self.find(nom)]
        tgts: set[str] = set()
        for sub in self.statics.subroles.get(role, frozenset((role,))):
            tgts |= out.get(sub, set())
        return sorted(tgts, key=self._created.__getitem__)

    def induced_successors_reflexive(self, nom: str, role: str) -> list[str]:
        """Induced successors plus the class of nom itself when some
        subrole of the given role is declared reflexive."""
        tgts = self.induced_successors(nom, role)
        if role in self.statics.reflexive_closed and nom in self._created:
            rep = self.find(nom)
            if rep not in tgts:
                tgts.append(rep)
                tgts.sort(key=self._created.__getitem__)
        return tgts

    def has_induced_successor(self, nom: str) -> bool:
        """True iff the class of nom has an outgoing closure edge of any
        role (the non-reflexive successor check used by blocking)."""
        if nom not in self._created:
            return False
        return any(self._out[self.find(nom)].values())

    # -- patterns ---------------------------------------------------------

    def pattern_of(self, nom: str, role: Optional[str] = None) -> frozenset[Expr]:
        """The diamond/box expressions labelling the class of nom; with a
        role given, only that role's (the per-role pattern of the basic
        calculus)."""
        pat = set()
        for e in self.labels_of(nom):
            if isinstance(e, (Dia, Box)) and (role is None or e.role == role):
                pat.add(e)
        return frozenset(pat)

    def pattern_expanded(self, pattern: frozenset[Expr],
                         role: Optional[str] = None) -> bool:
        """True iff some nominal with a successor carries the whole pattern.

        Basic mode (role given): the witness needs an edge of that role and
        its per-role pattern must contain the given one.  Extended mode:
        the witness needs an induced successor of any role (reflexivity
        does not count) and its full pattern must contain the given one.
        """
        if role is not None:
            for rep in self.class_reps():
                if self._out[rep].get(role) and pattern <= self.pattern_of(rep, role):
                    return True
            return False
        for rep in self.class_reps():
            if any(self._out[rep].values()) and pattern <= self.pattern_of(rep):
                return True
        return False

    def pattern_witnesses(self, role: Optional[str] = None) -> list[frozenset[Expr]]:
        """Patterns of all classes that currently have a successor; every
        expanded pattern is a subset of one of these."""
        out = []
        for rep in self.class_reps():
            if role is not None:
                if self._out[rep].get(role):
                    out.append(self.pattern_of(rep, role))
            elif any(self._out[rep].values()):
                out.append(self.pattern_of(rep))
        return out

    # -- fresh nominals ----------------------------------------------------

    def peek_fresh(self, k: int) -> list[str]:
        """The next k fresh nominal names, without reserving them."""
        names = []
        n = self._fresh_counter
        while len(names) < k:
            cand = f"{FRESH_PREFIX}{n}"
            if cand not in self._created:
                names.append(cand)
            n += 1
        return names

    def fresh_nominals(self, k: int) -> list[str]:
        """Reserve and return k nominals not yet on the branch.  Names are
        drawn deterministically from the counter; parsed nominals that
        happen to look like fresh names are skipped over."""
        if k < 1:
            raise ValueError("k must be >= 1")
        names = self.peek_fresh(k)
        last = int(names[-1][len(FRESH_PREFIX):])
        self._fresh_counter = last + 1
        return names

    # -- misc ---------------------------------------------------------------

    def size(self) -> int:
        """Number of formulas, not counting the closing falsum."""
        return len(self.formulas) - (1 if self.closed else 0)

    def label_formulas(self) -> Iterator["Label"]:
        for f in self.formulas:
            if isinstance(f, Label):
                yield f

    def __repr__(self) -> str:
        status = "closed" if self.closed else "open"
        return f"<Branch {status}, {len(self.formulas)} formulas, " \
               f"{len(self._created)} nominals>"


from typing import Iterator  # noqa: E402  (used in annotation above)
