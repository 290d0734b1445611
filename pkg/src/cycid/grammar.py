"""Prefix text syntax for terms and formulas.

    term    ::= 0 | <digits> | s(term) | +(term,term) | *(term,term) | var
    formula ::= =(t,u) | <(t,u) | P(t) | not formula | or(f,g) | and(f,g)
              | imp(f,g) | ex x. f | all x. f | ind[name](X, x, f)(t)

`not` applied to a compound formula is read as its De Morgan dual.  A bare
`P(t)` names a declared inductive predicate when `P` is in the environment,
otherwise a set variable.  Numerals abbreviate iterated `s`.
"""

from __future__ import annotations

import re
from typing import Dict, Iterable, List, Optional

from .syntax import (
    And, Eq, Exists, Forall, Formula, IndPred, Lt, NotEq, NotLt, NotPred, Or,
    Plus, Pred, SetVar, Succ, Term, Times, Var, Zero, implies, mk_ind_pred,
    negate, numeral, all_preds,
)

KEYWORDS = {"s", "or", "and", "not", "ex", "all", "ind", "imp"}

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<op>:=|=>|[()\[\]{},.=<+*:;])
""", re.VERBOSE)


class ParseError(ValueError):
    def __init__(self, msg, line=None, col=None):
        self.msg, self.line, self.col = msg, line, col
        where = f"{line}:{col}: " if line is not None else ""
        super().__init__(where + msg)


class Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind, self.text, self.line, self.col = kind, text, line, col

    def __repr__(self):
        return f"Token({self.kind}, {self.text!r})"


def tokenize(text: str, line: int = 1, col0: int = 1) -> List[Token]:
    out = []
    pos = 0
    col = col0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        chunk = m.group()
        if kind not in ("ws", "comment"):
            out.append(Token(kind, chunk, line, col))
        nl = chunk.count("\n")
        if nl:
            line += nl
            col = len(chunk) - chunk.rfind("\n")
        else:
            col += len(chunk)
        pos = m.end()
    out.append(Token("eof", "", line, col))
    return out


class Parser:
    def __init__(self, tokens: List[Token], env: Optional[Dict[str, IndPred]] = None):
        self.toks = tokens
        self.i = 0
        self.env = env if env is not None else {}
        self._setvars: List[str] = []

    # -- helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k=1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        raise ParseError(msg, tok.line, tok.col)

    def accept(self, text) -> bool:
        if self.tok.text == text and self.tok.kind != "eof":
            self.i += 1
            return True
        return False

    def expect(self, text):
        if not self.accept(text):
            self.error(f"expected {text!r}, got {self.tok.text or 'end of input'!r}")

    def ident(self) -> str:
        tok = self.tok
        if tok.kind != "ident":
            self.error(f"expected a name, got {tok.text or 'end of input'!r}")
        self.i += 1
        return tok.text

    def var(self) -> str:
        tok = self.tok
        name = self.ident()
        if name in KEYWORDS:
            self.error(f"keyword {name!r} used as a variable", tok)
        return name

    def at_end(self) -> bool:
        return self.tok.kind == "eof"

    # -- terms
    def term(self) -> Term:
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return numeral(int(tok.text))
        if tok.text == "s" and self.peek().text == "(":
            self.i += 2
            t = self.term()
            self.expect(")")
            return Succ(t)
        if tok.text in ("+", "*"):
            self.i += 1
            self.expect("(")
            a = self.term()
            self.expect(",")
            b = self.term()
            self.expect(")")
            return Plus(a, b) if tok.text == "+" else Times(a, b)
        if tok.kind == "ident":
            return Var(self.var())
        self.error(f"expected a term, got {tok.text or 'end of input'!r}")

    # -- formulas
    def formula(self) -> Formula:
        tok = self.tok
        text = tok.text
        if tok.kind == "op" and text in ("=", "<"):
            self.i += 1
            self.expect("(")
            a = self.term()
            self.expect(",")
            b = self.term()
            self.expect(")")
            return Eq(a, b) if text == "=" else Lt(a, b)
        if tok.kind != "ident":
            self.error(f"expected a formula, got {text or 'end of input'!r}")
        if text == "not":
            self.i += 1
            return negate(self.formula())
        if text in ("or", "and", "imp") and self.peek().text == "(":
            self.i += 2
            a = self.formula()
            self.expect(",")
            b = self.formula()
            self.expect(")")
            return {"or": Or, "and": And, "imp": implies}[text](a, b)
        if text in ("ex", "all"):
            self.i += 1
            v = self.var()
            self.expect(".")
            body = self.formula()
            return Exists(v, body) if text == "ex" else Forall(v, body)
        sym = self.pred_symbol()
        self.expect("(")
        t = self.term()
        self.expect(")")
        return Pred(sym, t)

    def pred_symbol(self):
        tok = self.tok
        if tok.text == "ind" and self.peek().text == "[":
            self.i += 2
            name = self.ident()
            self.expect("]")
            p = self.ind_decl(name)
            return p
        name = self.ident()
        if name in KEYWORDS:
            self.error(f"keyword {name!r} used as a predicate", tok)
        if name in self._setvars:
            return SetVar(name)
        if name in self.env:
            return self.env[name]
        return SetVar(name)

    def ind_decl(self, name: str) -> IndPred:
        """`(X, x, body)`; registers the predicate under `name`."""
        tok = self.tok
        self.expect("(")
        X = self.ident()
        self.expect(",")
        x = self.var()
        self.expect(",")
        self._setvars.append(X)
        try:
            body = self.formula()
        finally:
            self._setvars.pop()
        self.expect(")")
        try:
            p = mk_ind_pred(body, X, x, name)
        except ValueError as e:
            raise ParseError(str(e), tok.line, tok.col) from e
        self.env[name] = p
        return p


def parse_term(text: str) -> Term:
    p = Parser(tokenize(text))
    t = p.term()
    if not p.at_end():
        p.error("trailing input")
    return t


def parse_formula(text: str, env: Optional[Dict[str, IndPred]] = None) -> Formula:
    p = Parser(tokenize(text), env)
    f = p.formula()
    if not p.at_end():
        p.error("trailing input")
    return f


def parse_decls(text: str, env: Optional[Dict[str, IndPred]] = None) -> Dict[str, IndPred]:
    """Lines of the form `ind NAME := (X, x, body)`."""
    env = dict(env or {})
    p = Parser(tokenize(text), env)
    while not p.at_end():
        if not p.accept("ind"):
            p.error("expected 'ind'")
        name = p.ident()
        p.expect(":=")
        p.ind_decl(name)
    return env


# ---------------------------------------------------------------------------
# printing

def _numeral_value(t: Term) -> Optional[int]:
    n = 0
    while isinstance(t, Succ):
        t, n = t.arg, n + 1
    return n if isinstance(t, Zero) else None


def show_term(t: Term) -> str:
    n = _numeral_value(t)
    if n is not None:
        return str(n)
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Succ):
        return f"s({show_term(t.arg)})"
    op = "+" if isinstance(t, Plus) else "*"
    return f"{op}({show_term(t.left)},{show_term(t.right)})"


def _sym_name(sym, names) -> str:
    if isinstance(sym, SetVar):
        return sym.name
    if names is not None and sym in names:
        return names[sym]
    return sym.name


def show_formula(f: Formula, names: Optional[Dict[IndPred, str]] = None) -> str:
    """Serialise; `names` overrides the display names of inductive predicates."""
    if isinstance(f, Pred):
        return f"{_sym_name(f.sym, names)}({show_term(f.arg)})"
    if isinstance(f, NotPred):
        return f"not {_sym_name(f.sym, names)}({show_term(f.arg)})"
    if isinstance(f, (Eq, Lt)):
        op = "=" if isinstance(f, Eq) else "<"
        return f"{op}({show_term(f.left)},{show_term(f.right)})"
    if isinstance(f, (NotEq, NotLt)):
        op = "=" if isinstance(f, NotEq) else "<"
        return f"not {op}({show_term(f.left)},{show_term(f.right)})"
    if isinstance(f, (Or, And)):
        op = "or" if isinstance(f, Or) else "and"
        return f"{op}({show_formula(f.left, names)}, {show_formula(f.right, names)})"
    q = "ex" if isinstance(f, Exists) else "all"
    return f"{q} {f.var}. {show_formula(f.body, names)}"


def assign_names(preds: Iterable[IndPred]) -> Dict[IndPred, str]:
    """Unique identifiers for predicates, keeping display names where possible."""
    from .syntax import pred_rank
    names: Dict[IndPred, str] = {}
    used = set(KEYWORDS)
    for p in sorted(set(preds), key=lambda p: (pred_rank(p), p.name)):
        base = re.sub(r"[^A-Za-z0-9_']", "_", p.name) or "I"
        if not re.match(r"[A-Za-z_]", base):
            base = "I" + base
        name, k = base, 1
        while name in used:
            k += 1
            name = f"{base}{k}"
        used.add(name)
        names[p] = name
    return names


def show_decls(preds: Iterable[IndPred], names: Dict[IndPred, str]) -> List[str]:
    """Declarations in dependency order, one per line."""
    from .syntax import pred_rank
    lines = []
    for p in sorted(all_preds_of(preds), key=pred_rank):
        lines.append(f"ind {names[p]} := ({p.set_var}, {p.ind_var}, "
                     f"{show_formula(p.body, names)})")
    return lines


def all_preds_of(preds: Iterable[IndPred]):
    return all_preds(Pred(p, Zero()) for p in preds)
