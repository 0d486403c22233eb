"""Reader and writer for the ``.mcs`` system description language.

Grammar::

    mcs      ::= decl*
    decl     ::= context | bridge
    context  ::= "context" ID "kind" ("facts"|"clausal"|"asp") manager? "{" kbitem* "}"
    manager  ::= "managed" ("add"|"add_delete"|"guarded_revise")
    bridge   ::= "bridge" ID ":" ID "::" head "<-" bodylist? "."
    head     ::= atom | ("add("|"del("|"revise(") atom ")"
    bodylist ::= literal ("," literal)*
    literal  ::= ["not"] ID "::" atom
    atom     ::= NAME ["(" NAME ("," NAME)* ")"]

Knowledge-base items: facts ``a.``; clauses ``a | -b.``; ASP rules
``h1 | h2 :- b1, not b2.`` and constraints ``:- b1, not b2.``; in
``guarded_revise`` contexts also ``exclude p q.``.  ``#`` starts a line
comment.  Answer-set programs on their own (observer and preference
files) use the ASP item syntax and are read with :func:`parse_program`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .core import MCS, OPS, BeliefLiteral, BridgeRule, Context, OpCommand, head_text, validate
from .logics import LOGICS, AspKB, AspRule, ClausalKB, Clause, FactsKB
from .managed import MANAGERS, GuardedReviseManager, make_manager

HEADER = "# multi-context system\n"

SYNTAX = "syntax"
DANGLING = "dangling-reference"
DUPLICATE = "duplicate-id"
MODE = "mode-mismatch"


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    length: int


@dataclass(frozen=True)
class ParseError:
    span: SourceSpan
    message: str
    kind: str

    def __str__(self) -> str:
        return f"{self.span.line}:{self.span.column}: {self.kind}: {self.message}"


class ParseFailure(Exception):
    """Raised with every independent error found in the input."""

    def __init__(self, errors: list[ParseError]):
        self.errors = sorted(errors, key=lambda e: (e.span.line, e.span.column))
        super().__init__("\n".join(str(e) for e in self.errors))


@dataclass(frozen=True)
class Token:
    kind: str  # name, sym, eof
    text: str
    line: int
    column: int

    @property
    def span(self) -> SourceSpan:
        return SourceSpan(self.line, self.column, max(len(self.text), 1) if self.kind != "eof" else 0)

    def describe(self) -> str:
        return "end of input" if self.kind == "eof" else repr(self.text)


_LEX = re.compile(
    r"(?P<ws>[ \t\r\f\v]+)|(?P<nl>\n)|(?P<comment>\#[^\n]*)"
    r"|(?P<name>[A-Za-z0-9_]+)|(?P<sym>::|:-|<-|[:|,.(){}-])"
)


def tokenize(text: str) -> tuple[list[Token], list[ParseError]]:
    tokens: list[Token] = []
    errors: list[ParseError] = []
    line, line_start, i = 1, 0, 0
    while i < len(text):
        m = _LEX.match(text, i)
        col = i - line_start + 1
        if m is None:
            errors.append(ParseError(SourceSpan(line, col, 1), f"unexpected character {text[i]!r}", SYNTAX))
            i += 1
            continue
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind in ("name", "sym"):
            tokens.append(Token(kind, m.group(), line, col))
        i = m.end()
    tokens.append(Token("eof", "", line, i - line_start + 1))
    return tokens, errors


class _Abort(Exception):
    pass


@dataclass
class _ContextDecl:
    id_tok: Token
    kind: str
    manager: str | None = None
    manager_tok: Token | None = None
    facts: set = field(default_factory=set)
    clauses: set = field(default_factory=set)
    rules: set = field(default_factory=set)
    exclusions: list = field(default_factory=list)  # (token, a, b)


@dataclass
class _BridgeDecl:
    id_tok: Token
    ctx_tok: Token
    head: object
    head_tok: Token
    body: list  # (BeliefLiteral, context token)


class _Parser:
    def __init__(self, text: str):
        self.tokens, self.errors = tokenize(text)
        self.pos = 0

    # -- token helpers
    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def at(self, text: str) -> bool:
        return self.tok.kind != "eof" and self.tok.text == text

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.pos += 1
        return t

    def fail(self, message: str, tok: Token | None = None, kind: str = SYNTAX):
        tok = tok or self.tok
        self.errors.append(ParseError(tok.span, message, kind))
        raise _Abort

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected {text!r}, found {self.tok.describe()}")
        return self.advance()

    def name(self, what: str) -> Token:
        if self.tok.kind != "name":
            self.fail(f"expected {what}, found {self.tok.describe()}")
        return self.advance()

    def atom(self) -> str:
        text = self.name("atom name").text
        if self.at("("):
            self.advance()
            args = [self.name("argument").text]
            while self.at(","):
                self.advance()
                args.append(self.name("argument").text)
            self.expect(")")
            text += "(" + ",".join(args) + ")"
        return text

    # -- declarations
    def parse_mcs(self) -> tuple[list[_ContextDecl], list[_BridgeDecl]]:
        contexts, bridges = [], []
        while self.tok.kind != "eof":
            start = self.pos
            try:
                if self.at("context"):
                    contexts.append(self.context())
                elif self.at("bridge"):
                    bridges.append(self.bridge())
                else:
                    self.fail(f"expected 'context' or 'bridge', found {self.tok.describe()}")
            except _Abort:
                self.recover(start)
        return contexts, bridges

    def recover(self, start: int) -> None:
        """Skip to the next top-level declaration keyword."""
        depth = sum(1 if t.text == "{" else -1 if t.text == "}" else 0 for t in self.tokens[start : self.pos] if t.kind == "sym")
        if self.pos == start:
            self.advance()
        while self.tok.kind != "eof":
            t = self.tok
            if t.kind == "sym" and t.text == "{":
                depth += 1
            elif t.kind == "sym" and t.text == "}":
                depth -= 1
                self.advance()
                if depth <= 0:
                    depth = 0
                continue
            elif depth <= 0 and t.kind == "name" and t.text in ("context", "bridge"):
                return
            self.advance()

    def context(self) -> _ContextDecl:
        self.expect("context")
        id_tok = self.name("context id")
        self.expect("kind")
        kind_tok = self.name("context kind")
        if kind_tok.text not in LOGICS:
            self.fail(f"unknown context kind {kind_tok.text!r}", kind_tok)
        decl = _ContextDecl(id_tok, kind_tok.text)
        if self.at("managed"):
            self.advance()
            decl.manager_tok = self.name("manager")
            if decl.manager_tok.text not in MANAGERS:
                self.fail(f"unknown manager {decl.manager_tok.text!r}", decl.manager_tok)
            decl.manager = decl.manager_tok.text
        self.expect("{")
        while not self.at("}"):
            if self.tok.kind == "eof":
                self.fail(f"unterminated block of context {id_tok.text!r}")
            try:
                self.kb_item(decl)
            except _Abort:
                self.skip_item()
        self.expect("}")
        return decl

    def skip_item(self) -> None:
        """Skip past the next '.', stopping before a closing brace."""
        while self.tok.kind != "eof" and not self.at("}"):
            if self.advance().text == ".":
                return

    def kb_item(self, decl: _ContextDecl) -> None:
        if self.at("exclude") and self.peek().kind == "name":
            tok = self.advance()
            a = self.atom()
            b = self.atom()
            self.expect(".")
            decl.exclusions.append((tok, a, b))
            return
        if decl.kind == "facts":
            decl.facts.add(self.atom())
            self.expect(".")
        elif decl.kind == "clausal":
            decl.clauses.add(self.clause())
        else:
            decl.rules.add(self.asp_rule())

    def clause(self) -> Clause:
        pos, neg = set(), set()
        while True:
            if self.at("-"):
                self.advance()
                neg.add(self.atom())
            else:
                pos.add(self.atom())
            if self.at("|"):
                self.advance()
                continue
            self.expect(".")
            return Clause(pos, neg)

    def asp_rule(self) -> AspRule:
        head, pos, neg = set(), set(), set()
        if not self.at(":-"):
            head.add(self.atom())
            while self.at("|"):
                self.advance()
                head.add(self.atom())
        if self.at(":-"):
            self.advance()
            if not self.at("."):
                while True:
                    if self.at("not") and self.peek().kind == "name":
                        self.advance()
                        neg.add(self.atom())
                    else:
                        pos.add(self.atom())
                    if not self.at(","):
                        break
                    self.advance()
        self.expect(".")
        return AspRule(head, pos, neg)

    def bridge(self) -> _BridgeDecl:
        self.expect("bridge")
        id_tok = self.name("rule id")
        self.expect(":")
        ctx_tok = self.name("context id")
        self.expect("::")
        head_tok = self.tok
        if self.tok.text in OPS and self.peek().text == "(":
            op = self.advance().text
            self.expect("(")
            head = OpCommand(op, self.atom())
            self.expect(")")
        else:
            head = self.atom()
        self.expect("<-")
        body = []
        if not self.at("."):
            while True:
                negated = False
                if self.at("not") and self.peek(2).text == "::":
                    self.advance()
                    negated = True
                lit_tok = self.name("context id")
                self.expect("::")
                body.append((BeliefLiteral(lit_tok.text, self.atom(), negated), lit_tok))
                if not self.at(","):
                    break
                self.advance()
        self.expect(".")
        return _BridgeDecl(id_tok, ctx_tok, head, head_tok, body)

    def program(self) -> AspKB:
        rules = set()
        while self.tok.kind != "eof":
            try:
                rules.add(self.asp_rule())
            except _Abort:
                while self.tok.kind != "eof" and not self.at("."):
                    self.advance()
                self.advance()
        return AspKB(rules)


def parse_mcs(text: str) -> MCS:
    """Parse a system description; raise :class:`ParseFailure` listing every error."""
    p = _Parser(text)
    ctx_decls, bridge_decls = p.parse_mcs()
    errors = p.errors

    contexts: dict[str, _ContextDecl] = {}
    for d in ctx_decls:
        if d.id_tok.text in contexts:
            errors.append(ParseError(d.id_tok.span, f"duplicate context id {d.id_tok.text!r}", DUPLICATE))
            continue
        contexts[d.id_tok.text] = d
        if d.manager == "guarded_revise" and d.kind != "facts":
            errors.append(
                ParseError(d.manager_tok.span, f"manager 'guarded_revise' needs kind facts, not {d.kind!r}", MODE)
            )
        if d.exclusions and d.manager != "guarded_revise":
            tok = d.exclusions[0][0]
            errors.append(ParseError(tok.span, f"'exclude' needs a guarded_revise manager in {d.id_tok.text!r}", MODE))
        for tok, a, b in d.exclusions:
            if a == b:
                errors.append(ParseError(tok.span, f"'exclude' needs two distinct atoms, got {a!r} twice", SYNTAX))

    rule_ids: set[str] = set()
    for b in bridge_decls:
        rid = b.id_tok.text
        if rid in rule_ids:
            errors.append(ParseError(b.id_tok.span, f"duplicate rule id {rid!r}", DUPLICATE))
        rule_ids.add(rid)
        target = contexts.get(b.ctx_tok.text)
        if target is None:
            errors.append(ParseError(b.ctx_tok.span, f"rule {rid!r} targets unknown context {b.ctx_tok.text!r}", DANGLING))
        elif isinstance(b.head, OpCommand):
            if target.manager is None:
                errors.append(
                    ParseError(b.head_tok.span, f"op-head {b.head} sent to unmanaged context {target.id_tok.text!r}", MODE)
                )
            elif b.head.op not in MANAGERS[target.manager].supported:
                errors.append(
                    ParseError(b.head_tok.span, f"manager {target.manager!r} does not support {b.head.op!r}", MODE)
                )
        for lit, tok in b.body:
            if lit.context not in contexts:
                errors.append(ParseError(tok.span, f"rule {rid!r} reads unknown context {lit.context!r}", DANGLING))
    if errors:
        raise ParseFailure(errors)

    mcs = MCS(
        tuple(_build_context(d) for d in ctx_decls),
        tuple(BridgeRule(b.id_tok.text, b.ctx_tok.text, b.head, tuple(l for l, _ in b.body)) for b in bridge_decls),
    )
    problems = validate(mcs)
    if problems:
        first = ctx_decls[0].id_tok.span if ctx_decls else SourceSpan(1, 1, 0)
        raise ParseFailure([ParseError(first, str(v), v.kind) for v in problems])
    return mcs


def _build_context(d: _ContextDecl) -> Context:
    if d.kind == "facts":
        kb = FactsKB(d.facts)
    elif d.kind == "clausal":
        kb = ClausalKB(d.clauses)
    else:
        kb = AspKB(d.rules)
    manager = None
    if d.manager is not None:
        manager = make_manager(d.manager, [(a, b) for _, a, b in d.exclusions])
    return Context(d.id_tok.text, LOGICS[d.kind], kb, manager)


def parse_program(text: str) -> AspKB:
    """Parse a stand-alone answer-set program (observer or preference file)."""
    p = _Parser(text)
    program = p.program()
    if p.errors:
        raise ParseFailure(p.errors)
    return program


# -- writer --------------------------------------------------------------------------------


def format_clause(c: Clause) -> str:
    lits = sorted([(a, "") for a in c.pos] + [(a, "-") for a in c.neg])
    return " | ".join(sign + a for a, sign in lits) + "."


def serialize_kb(ctx: Context) -> list[str]:
    kb = ctx.kb
    if isinstance(kb, FactsKB):
        items = [f"{a}." for a in sorted(kb.facts)]
    elif isinstance(kb, ClausalKB):
        if kb.vocabulary:
            raise ValueError(f"context {ctx.id!r}: clausal vocabulary outside clauses cannot be written")
        items = [format_clause(c) for c in sorted(kb.clauses, key=Clause.sort_key)]
    elif isinstance(kb, AspKB):
        items = [str(r) for r in kb.sorted_rules()]
    else:
        raise TypeError(f"cannot write knowledge base of type {type(kb).__name__}")
    if isinstance(ctx.manager, GuardedReviseManager):
        items += [f"exclude {a} {b}." for a, b in sorted(tuple(sorted(p)) for p in ctx.manager.exclusions)]
    return items


def serialize_mcs(mcs: MCS) -> str:
    """Canonical text; :func:`parse_mcs` reads it back to an equal system."""
    out = [HEADER]
    for c in mcs.contexts:
        managed = f" managed {c.manager.name}" if c.manager is not None else ""
        out.append(f"context {c.id} kind {c.logic.name}{managed} {{\n")
        out.extend(f"  {item}\n" for item in serialize_kb(c))
        out.append("}\n")
    if mcs.rules:
        out.append("\n")
    for r in mcs.rules:
        body = ", ".join(str(lit) for lit in r.body)
        body = f" {body}" if body else ""
        out.append(f"bridge {r.id}: {r.head_context}::{head_text(r.head)} <-{body}.\n")
    return "".join(out)


def serialize_program(program: AspKB) -> str:
    return "".join(f"{r}\n" for r in program.sorted_rules())
