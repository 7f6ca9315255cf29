"""Reader and printer for the ``.chc`` text format, plus a formula reader.

File grammar (``#`` starts a comment)::

    pred NAME(x:int, b:bool, ...);
    clause: body => head;

where ``body`` is an ``&``-separated list of atoms ``P(x, y)``, relations
between linear expressions (``<= < = != > >=``), boolean variables ``b`` /
``!b``, or ``true``; ``head`` is a single atom or ``false``.  Atom arguments
must be variables.
"""
from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, field
from typing import Sequence

from .chc import Atom, BoolLit, ChcSystem, Clause, LinearLit, PredDecl, RELATIONS
from .core import (
    FALSE,
    TRUE,
    BooleanArg,
    Const,
    Formula,
    LinearIneq,
    Lit,
    LocationEquals,
    conj,
    disj,
    negate,
)

KEYWORDS = {"pred", "clause", "true", "false"}
SORTS = ("int", "bool")


class ParseError(Exception):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {message}" if line else message)
        self.message = message
        self.line = line
        self.col = col


class PrimedVariableWarning(UserWarning):
    pass


_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<int>\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<sym>==>|=>|<=|>=|!=|==|&&|\|\||[<>=&!(),:;+\-*])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "int", "name", "sym", "eof"
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, m.group(), line, pos - line_start + 1))
        for i in range(pos, m.end()):
            if text[i] == "\n":
                line, line_start = line + 1, i + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Cursor:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def at(self, text: str) -> bool:
        return self.tok.kind in ("sym", "name") and self.tok.text == text

    def next(self) -> Token:
        tok = self.tok
        self.i += 1
        return tok

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(message, tok.line, tok.col)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return self.next()

    def name(self, what: str = "name") -> Token:
        tok = self.tok
        if tok.kind != "name" or tok.text in KEYWORDS:
            raise self.error(f"expected {what}, found {tok.text or 'end of input'!r}")
        return self.next()


# ---------------------------------------------------------------------------
# Linear expressions


def _linexp(cur: _Cursor) -> tuple[dict, int, list[Token]]:
    """``coef`` map (insertion ordered), constant, and the variable tokens seen."""
    coefs: dict[str, int] = {}
    const = 0
    seen: list[Token] = []
    sign = 1
    if cur.at("-"):
        cur.next()
        sign = -1
    while True:
        tok = cur.tok
        if tok.kind == "int":
            cur.next()
            value = int(tok.text)
            if cur.at("*"):
                cur.next()
                var = cur.tok
                if var.kind != "name" or var.text in KEYWORDS:
                    raise cur.error("expected a variable after '*'")
                cur.next()
                if cur.at("*"):
                    raise cur.error("nonlinear term")
                coefs[var.text] = coefs.get(var.text, 0) + sign * value
                seen.append(var)
            else:
                const += sign * value
        elif tok.kind == "name" and tok.text not in KEYWORDS:
            cur.next()
            if cur.at("*"):
                raise cur.error("nonlinear term (coefficients must be integer literals written first)")
            if cur.at("("):
                raise cur.error(f"predicate application {tok.text!r} inside an arithmetic term", tok)
            coefs[tok.text] = coefs.get(tok.text, 0) + sign
            seen.append(tok)
        else:
            raise cur.error(f"expected a linear term, found {tok.text or 'end of input'!r}")
        if cur.at("+"):
            sign = 1
        elif cur.at("-"):
            sign = -1
        else:
            return coefs, const, seen
        cur.next()


def _relation(lhs, rhs, rel: str) -> LinearLit:
    lcoef, lconst, _ = lhs
    rcoef, rconst, _ = rhs
    coefs: dict[str, int] = dict(lcoef)
    for v, c in rcoef.items():
        coefs[v] = coefs.get(v, 0) - c
    terms = tuple((c, v) for v, c in coefs.items() if c != 0)
    return LinearLit(terms, rel, rconst - lconst)


# ---------------------------------------------------------------------------
# Clause files


@dataclass
class SourceProgram:
    text: str
    system: ChcSystem
    positions: dict = field(default_factory=dict)  # ("pred"|"clause", index) -> (line, col)


def parse_source(text: str) -> SourceProgram:
    cur = _Cursor(tokenize(text))
    preds: dict[str, PredDecl] = {}
    clauses: list[Clause] = []
    positions: dict = {}
    while cur.tok.kind != "eof":
        start = cur.tok
        if cur.at("pred"):
            decl = _pred_decl(cur, preds)
            positions[("pred", len(preds))] = (start.line, start.col)
            preds[decl.name] = decl
        elif cur.at("clause"):
            positions[("clause", len(clauses))] = (start.line, start.col)
            clauses.append(_clause(cur, preds))
        else:
            raise cur.error(f"expected 'pred' or 'clause', found {cur.tok.text!r}")
    return SourceProgram(text, ChcSystem(tuple(preds.values()), tuple(clauses)), positions)


def parse(text: str) -> ChcSystem:
    """Parse ``.chc`` source text; raises :class:`ParseError` with line/column."""
    return parse_source(text).system


def parse_file(path) -> ChcSystem:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def _pred_decl(cur: _Cursor, preds: dict) -> PredDecl:
    cur.expect("pred")
    name_tok = cur.name("predicate name")
    if name_tok.text in preds:
        raise cur.error(f"predicate {name_tok.text!r} declared twice", name_tok)
    cur.expect("(")
    params: list[tuple[str, str]] = []
    while True:
        p = cur.name("parameter name")
        cur.expect(":")
        sort = cur.tok
        if sort.kind != "name":
            raise cur.error("expected a sort")
        if sort.text not in SORTS:
            raise cur.error(f"undeclared sort {sort.text!r}", sort)
        cur.next()
        if p.text in dict(params):
            raise cur.error(f"duplicate parameter {p.text!r}", p)
        params.append((p.text, sort.text))
        if cur.at(","):
            cur.next()
            continue
        break
    cur.expect(")")
    cur.expect(";")
    return PredDecl(name_tok.text, tuple(params))


class _Sorts:
    def __init__(self, cur: _Cursor):
        self.cur = cur
        self.order: dict[str, str] = {}

    def use(self, tok: Token, sort: str) -> None:
        old = self.order.get(tok.text)
        if old is None:
            self.order[tok.text] = sort
        elif old != sort:
            raise self.cur.error(f"variable {tok.text!r} used as {sort} but is {old}", tok)


def _atom(cur: _Cursor, preds: dict, sorts: _Sorts) -> Atom:
    name_tok = cur.next()
    decl = preds.get(name_tok.text)
    if decl is None:
        raise cur.error(f"unknown predicate {name_tok.text!r}", name_tok)
    cur.expect("(")
    args: list[Token] = []
    while True:
        tok = cur.tok
        if tok.kind != "name" or tok.text in KEYWORDS:
            raise cur.error("atom arguments must be variables", tok)
        cur.next()
        if not (cur.at(",") or cur.at(")")):
            raise cur.error("atom arguments must be variables (no terms)", cur.tok)
        args.append(tok)
        if cur.at(","):
            cur.next()
            continue
        break
    close = cur.expect(")")
    if len(args) != decl.arity:
        raise cur.error(
            f"arity mismatch: {decl.name} takes {decl.arity} argument(s), got {len(args)}", close
        )
    for tok, (_, sort) in zip(args, decl.params):
        sorts.use(tok, sort)
    return Atom(decl.name, tuple(t.text for t in args))


def _is_atom_start(cur: _Cursor) -> bool:
    return cur.tok.kind == "name" and cur.tok.text not in KEYWORDS and cur.peek().text == "("


def _body_item(cur: _Cursor, preds: dict, sorts: _Sorts):
    if cur.at("true"):
        cur.next()
        return None
    if cur.at("false"):
        raise cur.error("'false' is only allowed as a clause head")
    if _is_atom_start(cur):
        return _atom(cur, preds, sorts)
    if cur.at("!"):
        cur.next()
        tok = cur.name("boolean variable")
        sorts.use(tok, "bool")
        return BoolLit(tok.text, False)
    lhs = _linexp(cur)
    if cur.tok.kind == "sym" and cur.tok.text in RELATIONS:
        rel = cur.next().text
        rhs = _linexp(cur)
        for tok in lhs[2] + rhs[2]:
            sorts.use(tok, "int")
        return _relation(lhs, rhs, rel)
    coefs, const, seen = lhs
    if len(seen) == 1 and const == 0 and list(coefs.values()) == [1]:
        sorts.use(seen[0], "bool")
        return BoolLit(seen[0].text, True)
    raise cur.error("expected a relation (<=, <, =, !=, >, >=)")


def _clause(cur: _Cursor, preds: dict) -> Clause:
    cur.expect("clause")
    cur.expect(":")
    sorts = _Sorts(cur)
    body = []
    while True:
        item = _body_item(cur, preds, sorts)
        if item is not None:
            body.append(item)
        if cur.at("&"):
            cur.next()
            continue
        break
    cur.expect("=>")
    if cur.at("false"):
        cur.next()
        head = None
    elif _is_atom_start(cur):
        head = _atom(cur, preds, sorts)
    else:
        raise cur.error("clause head must be a single atom or 'false'")
    if cur.at("&"):
        amp = cur.next()
        if _is_atom_start(cur):
            raise cur.error("two unknowns in a clause head", amp)
        raise cur.error("clause head must be a single atom or 'false'", amp)
    cur.expect(";")
    return Clause(tuple(sorts.order.items()), tuple(body), head)


# ---------------------------------------------------------------------------
# Printing


def format_linear(terms, rel: str, const: int) -> str:
    parts = []
    for i, (c, v) in enumerate(terms):
        mag = abs(c)
        body = v if mag == 1 else f"{mag}*{v}"
        if i == 0:
            parts.append(("-" if c < 0 else "") + body)
        else:
            parts.append(("- " if c < 0 else "+ ") + body)
    lhs = " ".join(parts) if parts else "0"
    return f"{lhs} {rel} {const}"


def format_item(item) -> str:
    if isinstance(item, Atom):
        return f"{item.pred}({', '.join(item.args)})"
    if isinstance(item, BoolLit):
        return item.var if item.positive else f"!{item.var}"
    return format_linear(item.terms, item.rel, item.const)


def format_clause(clause: Clause) -> str:
    body = " & ".join(format_item(b) for b in clause.body) or "true"
    head = "false" if clause.head is None else format_item(clause.head)
    return f"clause: {body} => {head};"


def format_system(system: ChcSystem) -> str:
    lines = []
    for p in system.predicates:
        params = ", ".join(f"{n}:{s}" for n, s in p.params)
        lines.append(f"pred {p.name}({params});")
    lines += [format_clause(c) for c in system.clauses]
    return "\n".join(lines) + ("\n" if lines else "")


# ---------------------------------------------------------------------------
# Primed-variable convention


def primed_base(name: str, names) -> str | None:
    """``xp`` is the primed copy of ``x`` when both occur in the clause."""
    if len(name) > 1 and name.endswith("p") and name[:-1] in names:
        return name[:-1]
    return None


def desugar_assignments(system: ChcSystem) -> ChcSystem:
    """Check the primed-variable convention; primed names stay ordinary variables.

    Warns (``PrimedVariableWarning``) when a primed variable appears neither in
    the head nor in the arithmetic constraint of its clause.
    """
    for i, clause in enumerate(system.clauses):
        names = set(clause.var_names)
        constrained = {v for lit in clause.body_constraint for v in _lit_vars(lit)}
        in_head = set(clause.head.args) if clause.head else set()
        for v in clause.var_names:
            if primed_base(v, names) and v not in constrained and v not in in_head:
                warnings.warn(
                    f"clause {i}: primed variable {v!r} is neither constrained nor used in the head",
                    PrimedVariableWarning,
                    stacklevel=2,
                )
    return system


def _lit_vars(lit) -> list[str]:
    if isinstance(lit, BoolLit):
        return [lit.var]
    return [v for _, v in lit.terms]


# ---------------------------------------------------------------------------
# Formulas over predicate parameters


def parse_formula(text: str, names: Sequence[str], bool_names: Sequence[str] = ()) -> Formula:
    """Read a formula as printed by :func:`format_formula`.

    ``names`` gives the slot of each parameter; ``bool_names`` marks the
    boolean ones.  Relations must be octagonal (at most two variables with
    unit coefficients); ``l == NAME`` is a location test.
    """
    cur = _Cursor(tokenize(text))
    slots = {n: i for i, n in enumerate(names)}
    f = _f_imp(cur, slots, set(bool_names))
    if cur.tok.kind != "eof":
        raise cur.error(f"unexpected {cur.tok.text!r}")
    return f


def _f_imp(cur, slots, bools) -> Formula:
    lhs = _f_or(cur, slots, bools)
    if cur.at("==>"):
        cur.next()
        return disj(negate(lhs), _f_imp(cur, slots, bools))
    return lhs


def _f_or(cur, slots, bools) -> Formula:
    args = [_f_and(cur, slots, bools)]
    while cur.at("||"):
        cur.next()
        args.append(_f_and(cur, slots, bools))
    return disj(*args) if len(args) > 1 else args[0]


def _f_and(cur, slots, bools) -> Formula:
    args = [_f_unary(cur, slots, bools)]
    while cur.at("&&"):
        cur.next()
        args.append(_f_unary(cur, slots, bools))
    return conj(*args) if len(args) > 1 else args[0]


def _f_unary(cur, slots, bools) -> Formula:
    if cur.at("!"):
        cur.next()
        return negate(_f_unary(cur, slots, bools))
    if cur.at("("):
        cur.next()
        f = _f_imp(cur, slots, bools)
        cur.expect(")")
        return f
    if cur.at("true"):
        cur.next()
        return TRUE
    if cur.at("false"):
        cur.next()
        return FALSE
    tok = cur.tok
    if tok.kind == "name" and tok.text == "l" and "l" not in slots and cur.peek().text == "==":
        cur.next()
        cur.next()
        return Lit(LocationEquals(cur.name("location").text))
    if tok.kind == "name" and tok.text in bools and cur.peek().text not in RELATIONS + ("==", "+", "-"):
        cur.next()
        return Lit(BooleanArg(slots[tok.text]))
    lhs = _linexp(cur)
    rel_tok = cur.tok
    if not (rel_tok.kind == "sym" and rel_tok.text in RELATIONS + ("==",)):
        raise cur.error("expected a relation")
    cur.next()
    rhs = _linexp(cur)
    for t in lhs[2] + rhs[2]:
        if t.text not in slots:
            raise cur.error(f"unknown variable {t.text!r}", t)
    lit = _relation(lhs, rhs, "=" if rel_tok.text == "==" else rel_tok.text)
    return _octagon(lit, slots, cur, rel_tok)


def _octagon(lit: LinearLit, slots, cur, tok) -> Formula:
    terms = tuple((slots[v], c) for c, v in lit.terms)
    k = lit.const
    if not terms:
        from .chc import compare

        return Const(bool(compare(0, lit.rel, k)))
    if len(terms) > 2 or any(c not in (-1, 1) for _, c in terms):
        raise cur.error("relation is not octagonal (use x <= c, x - y <= c, ...)", tok)
    flipped = tuple((s, -c) for s, c in terms)
    le = Lit(LinearIneq(terms, k))
    ge = Lit(LinearIneq(flipped, -k))
    if lit.rel == "<=":
        return le
    if lit.rel == "<":
        return Lit(LinearIneq(terms, k - 1))
    if lit.rel == ">=":
        return ge
    if lit.rel == ">":
        return Lit(LinearIneq(flipped, -k - 1))
    if lit.rel == "=":
        return conj(le, ge)
    return negate(conj(le, ge))
