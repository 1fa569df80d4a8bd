"""Surface grammar, expression trees, NNF conversion and static validation.

The expression language is graded multimodal logic with nominals and
global counting modalities:

    t ::= p | @x | !t | t & t | t | t | <r>n t | [r]n t | E n t | A n t

``<r>n t`` holds at a state with at least n+1 r-successors satisfying t;
``[r]n t`` allows at most n exceptional r-successors; ``E n t`` / ``A n t``
are the global (role-free) counterparts.  A problem additionally carries
relational facts (edges, equations, disequations) and role assertions
(inclusions, reflexivity, transitivity).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Union


# ---------------------------------------------------------------------------
# Expressions
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Prop:
    name: str

    def __str__(self) -> str:
        return print_expr(self)


@dataclass(frozen=True, slots=True)
class NomTest:
    """Nominal test @x: true exactly at the state named by x."""

    name: str

    def __str__(self) -> str:
        return print_expr(self)


@dataclass(frozen=True, slots=True)
class Neg:
    sub: "Expr"

    def __str__(self) -> str:
        return print_expr(self)


@dataclass(frozen=True, slots=True)
class Conj:
    left: "Expr"
    right: "Expr"

    def __str__(self) -> str:
        return print_expr(self)


@dataclass(frozen=True, slots=True)
class Disj:
    left: "Expr"
    right: "Expr"

    def __str__(self) -> str:
        return print_expr(self)


@dataclass(frozen=True, slots=True)
class Dia:
    """At least grade+1 role-successors satisfy sub."""

    role: str
    grade: int
    sub: "Expr"

    def __post_init__(self):
        if self.grade < 0:
            raise ValueError("grade must be a non-negative integer")

    def __str__(self) -> str:
        return print_expr(self)


@dataclass(frozen=True, slots=True)
class Box:
    """All role-successors except at most grade satisfy sub."""

    role: str
    grade: int
    sub: "Expr"

    def __post_init__(self):
        if self.grade < 0:
            raise ValueError("grade must be a non-negative integer")

    def __str__(self) -> str:
        return print_expr(self)


@dataclass(frozen=True, slots=True)
class ExistsGlobal:
    """At least grade+1 states satisfy sub."""

    grade: int
    sub: "Expr"

    def __post_init__(self):
        if self.grade < 0:
            raise ValueError("grade must be a non-negative integer")

    def __str__(self) -> str:
        return print_expr(self)


@dataclass(frozen=True, slots=True)
class ForallGlobal:
    """All states except at most grade satisfy sub."""

    grade: int
    sub: "Expr"

    def __post_init__(self):
        if self.grade < 0:
            raise ValueError("grade must be a non-negative integer")

    def __str__(self) -> str:
        return print_expr(self)


Expr = Union[Prop, NomTest, Neg, Conj, Disj, Dia, Box, ExistsGlobal, ForallGlobal]


def is_nnf(e: Expr) -> bool:
    """True iff negation occurs only directly on propositions and nominal tests."""
    if isinstance(e, (Prop, NomTest)):
        return True
    if isinstance(e, Neg):
        return isinstance(e.sub, (Prop, NomTest))
    if isinstance(e, (Conj, Disj)):
        return is_nnf(e.left) and is_nnf(e.right)
    if isinstance(e, (Dia, Box, ExistsGlobal, ForallGlobal)):
        return is_nnf(e.sub)
    raise TypeError(f"not an expression: {e!r}")


def to_nnf(e: Expr) -> Expr:
    """Push negations inward until they sit on atoms only.

    The result is semantically equivalent: negation dualizes diamonds
    against boxes and the global modalities against each other, keeping
    the grade.
    """
    if isinstance(e, (Prop, NomTest)):
        return e
    if isinstance(e, Conj):
        return Conj(to_nnf(e.left), to_nnf(e.right))
    if isinstance(e, Disj):
        return Disj(to_nnf(e.left), to_nnf(e.right))
    if isinstance(e, Dia):
        return Dia(e.role, e.grade, to_nnf(e.sub))
    if isinstance(e, Box):
        return Box(e.role, e.grade, to_nnf(e.sub))
    if isinstance(e, ExistsGlobal):
        return ExistsGlobal(e.grade, to_nnf(e.sub))
    if isinstance(e, ForallGlobal):
        return ForallGlobal(e.grade, to_nnf(e.sub))
    # e is a negation: dispatch on the negated operand
    s = e.sub
    if isinstance(s, (Prop, NomTest)):
        return e
    if isinstance(s, Neg):
        return to_nnf(s.sub)
    if isinstance(s, Conj):
        return Disj(to_nnf(Neg(s.left)), to_nnf(Neg(s.right)))
    if isinstance(s, Disj):
        return Conj(to_nnf(Neg(s.left)), to_nnf(Neg(s.right)))
    if isinstance(s, Dia):
        return Box(s.role, s.grade, to_nnf(Neg(s.sub)))
    if isinstance(s, Box):
        return Dia(s.role, s.grade, to_nnf(Neg(s.sub)))
    if isinstance(s, ExistsGlobal):
        return ForallGlobal(s.grade, to_nnf(Neg(s.sub)))
    if isinstance(s, ForallGlobal):
        return ExistsGlobal(s.grade, to_nnf(Neg(s.sub)))
    raise TypeError(f"not an expression: {s!r}")


def subexpressions(e: Expr) -> Iterator[Expr]:
    """Pre-order traversal of all subexpressions of e, including e itself."""
    yield e
    if isinstance(e, Neg):
        yield from subexpressions(e.sub)
    elif isinstance(e, (Conj, Disj)):
        yield from subexpressions(e.left)
        yield from subexpressions(e.right)
    elif isinstance(e, (Dia, Box, ExistsGlobal, ForallGlobal)):
        yield from subexpressions(e.sub)


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

# precedence: | = 1, & = 2, prefix operators = 3, atoms = 4
_PREC_DISJ, _PREC_CONJ, _PREC_PREFIX = 1, 2, 3


def _print(e: Expr, parent_prec: int, right_child: bool) -> str:
    if isinstance(e, Prop):
        return e.name
    if isinstance(e, NomTest):
        return f"@{e.name}"
    if isinstance(e, Neg):
        return f"!{_print(e.sub, _PREC_PREFIX, False)}"
    if isinstance(e, Dia):
        return f"<{e.role}>{e.grade} {_print(e.sub, _PREC_PREFIX, False)}"
    if isinstance(e, Box):
        return f"[{e.role}]{e.grade} {_print(e.sub, _PREC_PREFIX, False)}"
    if isinstance(e, ExistsGlobal):
        return f"E {e.grade} {_print(e.sub, _PREC_PREFIX, False)}"
    if isinstance(e, ForallGlobal):
        return f"A {e.grade} {_print(e.sub, _PREC_PREFIX, False)}"
    if isinstance(e, Conj):
        prec = _PREC_CONJ
        s = f"{_print(e.left, prec, False)} & {_print(e.right, prec, True)}"
    elif isinstance(e, Disj):
        prec = _PREC_DISJ
        s = f"{_print(e.left, prec, False)} | {_print(e.right, prec, True)}"
    else:
        raise TypeError(f"not an expression: {e!r}")
    # binary operators are left-associative; a right child at equal
    # precedence needs parentheses to survive a round trip
    if prec < parent_prec or (prec == parent_prec and right_child):
        return f"({s})"
    return s


def print_expr(e: Expr) -> str:
    """Canonical text form; parse_expr(print_expr(e)) reproduces e."""
    return _print(e, 0, False)


# ---------------------------------------------------------------------------
# Problems
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Problem:
    """A validated satisfiability problem.

    Labeled formulas are stored in NNF.  Role assertions (inclusions,
    reflexivity, transitivity) are immutable problem-level facts; the
    tableau rules never extend them.
    """

    labels: tuple[tuple[Expr, str], ...] = ()
    edges: tuple[tuple[str, str, str], ...] = ()          # (role, x, y)
    equations: tuple[tuple[str, str], ...] = ()
    disequations: tuple[tuple[str, str], ...] = ()
    inclusions: tuple[tuple[str, str], ...] = ()          # (r, r2) means r <= r2
    reflexive: frozenset[str] = frozenset()
    transitive: frozenset[str] = frozenset()

    def nominals(self) -> list[str]:
        """All nominals in order of first occurrence."""
        seen: dict[str, None] = {}
        for e, x in self.labels:
            seen.setdefault(x, None)
            for sub in subexpressions(e):
                if isinstance(sub, NomTest):
                    seen.setdefault(sub.name, None)
                elif isinstance(sub, Neg) and isinstance(sub.sub, NomTest):
                    seen.setdefault(sub.sub.name, None)
        for _, x, y in self.edges:
            seen.setdefault(x, None)
            seen.setdefault(y, None)
        for x, y in self.equations + self.disequations:
            seen.setdefault(x, None)
            seen.setdefault(y, None)
        return list(seen)

    def roles(self) -> list[str]:
        """All roles in order of first occurrence."""
        seen: dict[str, None] = {}
        for e, _ in self.labels:
            for sub in subexpressions(e):
                if isinstance(sub, (Dia, Box)):
                    seen.setdefault(sub.role, None)
        for r, _, _ in self.edges:
            seen.setdefault(r, None)
        for r, r2 in self.inclusions:
            seen.setdefault(r, None)
            seen.setdefault(r2, None)
        for r in sorted(self.reflexive | self.transitive):
            seen.setdefault(r, None)
        return list(seen)

    def propositions(self) -> list[str]:
        seen: dict[str, None] = {}
        for e, _ in self.labels:
            for sub in subexpressions(e):
                if isinstance(sub, Prop):
                    seen.setdefault(sub.name, None)
        return list(seen)

    def __str__(self) -> str:
        return print_problem(self)


def subrole_closure(inclusions, roles) -> dict[str, frozenset[str]]:
    """Map each role r to {r' | r' <=* r}, the reflexive-transitive closure
    of the declared inclusions, restricted to the given role set."""
    below: dict[str, set[str]] = {r: {r} for r in roles}
    changed = True
    while changed:
        changed = False
        for sub, sup in inclusions:
            if sub in below and sup in below:
                new = below[sub] - below[sup]
                if new:
                    below[sup] |= new
                    changed = True
    return {r: frozenset(s) for r, s in below.items()}


def simple_roles(p: Problem) -> frozenset[str]:
    """Roles with no transitive subrole under the inclusion closure.

    Graded boxes (grade > 0) are admitted on simple roles only.
    """
    roles = p.roles()
    below = subrole_closure(p.inclusions, roles)
    return frozenset(
        r for r in roles
        if not any(sub in p.transitive for sub in below[r])
    )


class ValidationError(ValueError):
    """The problem violates a static restriction."""


def validate(p: Problem) -> None:
    """Reject graded boxes on non-simple roles."""
    simple = simple_roles(p)
    for e, x in p.labels:
        for sub in subexpressions(e):
            if isinstance(sub, Box) and sub.grade > 0 and sub.role not in simple:
                raise ValidationError(
                    f"graded box {print_expr(sub)} at nominal {x}: "
                    f"role '{sub.role}' is not simple (it has a transitive "
                    f"subrole), so only grade 0 is allowed"
                )


def print_problem(p: Problem) -> str:
    """Canonical text form; parse_problem(print_problem(p)) reproduces p."""
    decls: list[str] = []
    for e, x in p.labels:
        decls.append(f"at {x}: {print_expr(e)}")
    for r, x, y in p.edges:
        decls.append(f"{r}({x}, {y})")
    for x, y in p.equations:
        decls.append(f"{x} = {y}")
    for x, y in p.disequations:
        decls.append(f"{x} != {y}")
    for r, r2 in p.inclusions:
        decls.append(f"{r} <= {r2}")
    for r in sorted(p.reflexive):
        decls.append(f"refl {r}")
    for r in sorted(p.transitive):
        decls.append(f"trans {r}")
    return ";\n".join(decls)


# ---------------------------------------------------------------------------
# Lexer / parser
# ---------------------------------------------------------------------------

class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


# `at`, `refl` and `trans` introduce declarations; `E` and `A` introduce the
# global modalities.  Reserving them keeps the grammar one-token predictive.
KEYWORDS = frozenset({"at", "refl", "trans", "E", "A"})

_SYMBOLS = ("<=", "!=", ";", ":", ",", "(", ")", "<", ">", "[", "]", "=", "&", "|", "!", "@")


@dataclass(frozen=True, slots=True)
class _Token:
    kind: str   # IDENT, NAT, a literal symbol, or EOF
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    toks: list[_Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            toks.append(_Token("IDENT", word, line, col))
            col += j - i
            i = j
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(_Token("NAT", text[i:j], line, col))
            col += j - i
            i = j
            continue
        for sym in _SYMBOLS:
            if text.startswith(sym, i):
                toks.append(_Token(sym, sym, line, col))
                i += len(sym)
                col += len(sym)
                break
        else:
            raise ParseError(f"unexpected character {c!r}", line, col)
    toks.append(_Token("EOF", "", line, col))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.pos = 0
        # identifier -> (namespace, line, col); namespaces are disjoint
        self.names: dict[str, tuple[str, int, int]] = {}

    def peek(self, ahead: int = 0) -> _Token:
        return self.toks[min(self.pos + ahead, len(self.toks) - 1)]

    def next(self) -> _Token:
        t = self.toks[self.pos]
        if t.kind != "EOF":
            self.pos += 1
        return t

    def expect(self, kind: str) -> _Token:
        t = self.peek()
        if t.kind != kind:
            raise ParseError(f"expected {kind!r}, found {t.text or 'end of input'!r}",
                             t.line, t.col)
        return self.next()

    def ident(self, namespace: str) -> str:
        t = self.peek()
        if t.kind != "IDENT":
            raise ParseError(f"expected a {namespace} name, found "
                             f"{t.text or 'end of input'!r}", t.line, t.col)
        if t.text in KEYWORDS:
            raise ParseError(f"{t.text!r} is a reserved word and cannot name a "
                             f"{namespace}", t.line, t.col)
        self.next()
        prev = self.names.get(t.text)
        if prev is None:
            self.names[t.text] = (namespace, t.line, t.col)
        elif prev[0] != namespace:
            raise ParseError(
                f"identifier {t.text!r} already used as a {prev[0]} at "
                f"{prev[1]}:{prev[2]}, now used as a {namespace}",
                t.line, t.col)
        return t.text

    def nat(self) -> int:
        t = self.peek()
        if t.kind != "NAT":
            raise ParseError(f"expected a grade (natural number), found "
                             f"{t.text or 'end of input'!r}", t.line, t.col)
        self.next()
        return int(t.text)

    # -- expressions --------------------------------------------------

    def expr(self) -> Expr:
        e = self.conj()
        while self.peek().kind == "|":
            self.next()
            e = Disj(e, self.conj())
        return e

    def conj(self) -> Expr:
        e = self.prefix()
        while self.peek().kind == "&":
            self.next()
            e = Conj(e, self.prefix())
        return e

    def prefix(self) -> Expr:
        t = self.peek()
        if t.kind == "!":
            self.next()
            return Neg(self.prefix())
        if t.kind == "<":
            self.next()
            role = self.ident("role")
            self.expect(">")
            return Dia(role, self.nat(), self.prefix())
        if t.kind == "[":
            self.next()
            role = self.ident("role")
            self.expect("]")
            return Box(role, self.nat(), self.prefix())
        if t.kind == "@":
            self.next()
            return NomTest(self.ident("nominal"))
        if t.kind == "(":
            self.next()
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "IDENT":
            if t.text == "E":
                self.next()
                return ExistsGlobal(self.nat(), self.prefix())
            if t.text == "A":
                self.next()
                return ForallGlobal(self.nat(), self.prefix())
            return Prop(self.ident("proposition"))
        raise ParseError(f"expected an expression, found "
                         f"{t.text or 'end of input'!r}", t.line, t.col)

    # -- declarations -------------------------------------------------

    def decl(self, out: dict) -> None:
        t = self.peek()
        if t.kind == "IDENT" and t.text == "at":
            self.next()
            x = self.ident("nominal")
            self.expect(":")
            out["labels"].append((to_nnf(self.expr()), x))
            return
        if t.kind == "IDENT" and t.text == "refl":
            self.next()
            out["reflexive"].add(self.ident("role"))
            return
        if t.kind == "IDENT" and t.text == "trans":
            self.next()
            out["transitive"].add(self.ident("role"))
            return
        if t.kind == "IDENT":
            follow = self.peek(1).kind
            if follow == "(":
                r = self.ident("role")
                self.expect("(")
                x = self.ident("nominal")
                self.expect(",")
                y = self.ident("nominal")
                self.expect(")")
                out["edges"].append((r, x, y))
                return
            if follow == "=":
                x = self.ident("nominal")
                self.next()
                out["equations"].append((x, self.ident("nominal")))
                return
            if follow == "!=":
                x = self.ident("nominal")
                self.next()
                out["disequations"].append((x, self.ident("nominal")))
                return
            if follow == "<=":
                r = self.ident("role")
                self.next()
                out["inclusions"].append((r, self.ident("role")))
                return
        raise ParseError(f"expected a declaration, found "
                         f"{t.text or 'end of input'!r}", t.line, t.col)

    def problem(self) -> Problem:
        out = {
            "labels": [], "edges": [], "equations": [],
            "disequations": [], "inclusions": [],
            "reflexive": set(), "transitive": set(),
        }
        while self.peek().kind != "EOF":
            self.decl(out)
            t = self.peek()
            if t.kind == ";":
                self.next()
            elif t.kind != "EOF":
                raise ParseError(f"expected ';' or end of input, found {t.text!r}",
                                 t.line, t.col)
        return Problem(
            labels=tuple(out["labels"]),
            edges=tuple(out["edges"]),
            equations=tuple(out["equations"]),
            disequations=tuple(out["disequations"]),
            inclusions=tuple(out["inclusions"]),
            reflexive=frozenset(out["reflexive"]),
            transitive=frozenset(out["transitive"]),
        )


def parse_expr(text: str) -> Expr:
    """Parse a single expression (not NNF-converted)."""
    p = _Parser(text)
    e = p.expr()
    t = p.peek()
    if t.kind != "EOF":
        raise ParseError(f"unexpected {t.text!r} after expression", t.line, t.col)
    return e


def parse_problem(text: str) -> Problem:
    """Parse and validate a problem.  All expressions are NNF-converted."""
    problem = _Parser(text).problem()
    validate(problem)
    return problem
