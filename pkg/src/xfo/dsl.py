"""Textual front end: model (.xfo) and scenario (.xws) files.

Line-oriented statements; `{ ... }` blocks; `#` comments to end of line.
The grammar is versioned and documented in GRAMMAR.md. Parsing is total:
any input yields a (possibly partial) document plus diagnostics, and the
parser never throws. Statement dataclasses exclude spans from equality so
parse -> print -> parse round-trips compare structurally equal.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from .dynamics import (
    Cond,
    LinkTemplate,
    Loop,
    RuleAction,
    Seq,
    StatePredicate,
    Step,
    Wildcard,
    WorkflowStep,
)

GRAMMAR_VERSION = "1.0"

_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t]+)"
    r"|(?P<comment>#.*)"
    r"|(?P<wildcard>any:[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<int>[0-9]+)"
    r"|(?P<punct>[(){},=])"
)


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    column: int
    length: int = 1

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    code: str
    message: str
    span: SourceSpan

    def render(self) -> str:
        return f"{self.span}: {self.severity}: [{self.code}] {self.message}"


@dataclass(frozen=True)
class Token:
    kind: str  # name | int | wildcard | punct
    text: str
    line: int
    col: int


# ----------------------------------------------------------------------
# statements


def _span_field():
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class ModelHeader:
    name: str
    span: SourceSpan | None = _span_field()


@dataclass(frozen=True)
class UniversalStmt:
    name: str
    parent: str
    span: SourceSpan | None = _span_field()


@dataclass(frozen=True)
class ParticularStmt:
    name: str
    universal: str
    span: SourceSpan | None = _span_field()


@dataclass(frozen=True)
class RelationStmt:
    name: str
    domain: str
    range_: str
    span: SourceSpan | None = _span_field()


@dataclass(frozen=True)
class RelateStmt:
    from_u: str
    kind: str
    to_u: str
    span: SourceSpan | None = _span_field()


@dataclass(frozen=True)
class TransitionalStmt:
    name: str
    unlinks: tuple[LinkTemplate, ...]
    links: tuple[LinkTemplate, ...]
    span: SourceSpan | None = _span_field()


@dataclass(frozen=True)
class FrameStmt:
    name: str
    slots: tuple[str, ...]
    templates: tuple[LinkTemplate, ...]
    span: SourceSpan | None = _span_field()


@dataclass(frozen=True)
class WorkflowStmt:
    name: str
    params: tuple[str, ...]
    requires_agent: bool
    body: Seq
    span: SourceSpan | None = _span_field()


@dataclass(frozen=True)
class RuleStmt:
    name: str
    when: tuple[StatePredicate, ...]
    then: RuleAction
    span: SourceSpan | None = _span_field()


@dataclass(frozen=True)
class ScenarioHeader:
    name: str
    span: SourceSpan | None = _span_field()


@dataclass(frozen=True)
class HorizonStmt:
    value: int
    span: SourceSpan | None = _span_field()


@dataclass(frozen=True)
class InitStmt:
    template: LinkTemplate
    span: SourceSpan | None = _span_field()


@dataclass(frozen=True)
class RunStmt:
    workflow: str
    args: tuple
    at: int
    span: SourceSpan | None = _span_field()


@dataclass(frozen=True)
class RuleRefStmt:
    name: str
    span: SourceSpan | None = _span_field()


@dataclass(frozen=True)
class ActivateStmt:
    frame: str
    binding: tuple  # (slot, value) pairs in source order
    at: int
    span: SourceSpan | None = _span_field()


@dataclass(frozen=True)
class DeactivateStmt:
    frame: str
    binding: tuple
    at: int
    span: SourceSpan | None = _span_field()


@dataclass(frozen=True)
class ApplyStmt:
    transitional: str
    at: int
    span: SourceSpan | None = _span_field()


@dataclass(frozen=True)
class InterruptStmt:
    run: int
    at: int
    span: SourceSpan | None = _span_field()


@dataclass(frozen=True)
class ModelDocument:
    statements: tuple

    @property
    def name(self) -> str:
        for s in self.statements:
            if isinstance(s, ModelHeader):
                return s.name
        return "model"


@dataclass(frozen=True)
class ScenarioDocument:
    statements: tuple

    @property
    def name(self) -> str:
        for s in self.statements:
            if isinstance(s, ScenarioHeader):
                return s.name
        return "scenario"


@dataclass(frozen=True)
class ParseResult:
    document: ModelDocument | ScenarioDocument
    diagnostics: tuple[Diagnostic, ...]

    @property
    def ok(self) -> bool:
        return not any(d.severity == "error" for d in self.diagnostics)


# ----------------------------------------------------------------------
# tokenizer


def _tokenize(text: str, file: str, diags: list[Diagnostic]) -> list[list[Token]]:
    lines: list[list[Token]] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        toks: list[Token] = []
        pos = 0
        while pos < len(raw):
            m = _TOKEN_RE.match(raw, pos)
            if m is None:
                diags.append(Diagnostic(
                    "error", "E_PARSE", f"unexpected character {raw[pos]!r}",
                    SourceSpan(file, line_no, pos + 1),
                ))
                pos += 1
                continue
            kind = m.lastgroup
            if kind == "comment":
                break
            if kind != "ws":
                toks.append(Token(kind, m.group(), line_no, m.start() + 1))
            pos = m.end()
        lines.append(toks)
    return lines


class _ParseError(Exception):
    def __init__(self, message: str, span: SourceSpan):
        super().__init__(message)
        self.message = message
        self.span = span


def _brace_depth(tokens: list[Token]) -> int:
    return sum(1 for t in tokens if t.text == "{") - sum(1 for t in tokens if t.text == "}")


class _Toks:
    """Cursor over one line's tokens."""

    def __init__(self, tokens: list[Token], file: str, line_no: int):
        self.tokens = tokens
        self.file = file
        self.line_no = line_no
        self.pos = 0

    def span_at(self, tok: Token | None = None) -> SourceSpan:
        if tok is None:
            if self.pos < len(self.tokens):
                tok = self.tokens[self.pos]
            elif self.tokens:
                tok = self.tokens[-1]
            else:
                return SourceSpan(self.file, self.line_no, 1)
        return SourceSpan(self.file, tok.line, tok.col, len(tok.text))

    def peek(self) -> Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def at_end(self) -> bool:
        return self.pos >= len(self.tokens)

    def take(self) -> Token:
        tok = self.peek()
        if tok is None:
            raise _ParseError("unexpected end of line", self.span_at())
        self.pos += 1
        return tok

    def name(self, what: str = "a name") -> str:
        tok = self.take()
        if tok.kind != "name":
            raise _ParseError(f"expected {what}, got {tok.text!r}", self.span_at(tok))
        return tok.text

    def integer(self, what: str = "a number") -> int:
        tok = self.take()
        if tok.kind != "int":
            raise _ParseError(f"expected {what}, got {tok.text!r}", self.span_at(tok))
        return int(tok.text)

    def ref(self) -> str | Wildcard:
        tok = self.take()
        if tok.kind == "name":
            return tok.text
        if tok.kind == "wildcard":
            return Wildcard(tok.text.split(":", 1)[1])
        raise _ParseError(f"expected an entity ref, got {tok.text!r}", self.span_at(tok))

    def keyword(self, word: str) -> None:
        tok = self.take()
        if tok.kind != "name" or tok.text != word:
            raise _ParseError(f"expected '{word}', got {tok.text!r}", self.span_at(tok))

    def punct(self, text: str) -> None:
        tok = self.take()
        if tok.kind != "punct" or tok.text != text:
            raise _ParseError(f"expected '{text}', got {tok.text!r}", self.span_at(tok))

    def done(self) -> None:
        if not self.at_end():
            tok = self.tokens[self.pos]
            raise _ParseError(f"unexpected trailing {tok.text!r}", self.span_at(tok))


# ----------------------------------------------------------------------
# parser


class _Parser:
    def __init__(self, text: str, file: str):
        self.file = file
        self.diags: list[Diagnostic] = []
        self._lines = _tokenize(text, file, self.diags)
        self.i = 0

    # line stream -------------------------------------------------------

    def _next_line(self) -> _Toks | None:
        while self.i < len(self._lines):
            toks = self._lines[self.i]
            self.i += 1
            if toks:
                return _Toks(toks, self.file, toks[0].line)
        return None

    def _error(self, exc: _ParseError) -> None:
        self.diags.append(Diagnostic("error", "E_PARSE", exc.message, exc.span))

    def _skip_block(self, depth: int) -> None:
        """Recover after an error inside a block: consume to the matching
        closing brace."""
        while depth > 0:
            line = self._next_line()
            if line is None:
                return
            depth += _brace_depth(line.tokens)

    def _recover_line(self, exc: _ParseError, line: _Toks) -> None:
        """Record a clause-level error and skip any block it opened."""
        self._error(exc)
        depth = _brace_depth(line.tokens)
        if depth > 0:
            self._skip_block(depth)

    def _open_brace(self, line: _Toks) -> None:
        line.punct("{")
        line.done()

    # shared pieces -----------------------------------------------------

    def _template(self, line: _Toks) -> LinkTemplate:
        frm = line.name("an entity")
        kind = line.name("a relation kind")
        to = line.name("an entity")
        return LinkTemplate(frm, kind, to)

    def _predicate(self, line: _Toks) -> StatePredicate:
        tok = line.take()
        if tok.kind != "name" or tok.text not in ("exists", "not_exists"):
            raise _ParseError(f"expected 'exists' or 'not_exists', got {tok.text!r}", line.span_at(tok))
        frm = line.ref()
        kind = line.name("a relation kind")
        to = line.ref()
        return StatePredicate(tok.text == "exists", frm, kind, to)

    def _arg_list(self, line: _Toks) -> tuple:
        """Parenthesized comma-separated names/ints; parens may be empty."""
        args = []
        line.punct("(")
        if line.peek() and line.peek().text == ")":
            line.take()
            return tuple(args)
        while True:
            tok = line.take()
            if tok.kind == "name":
                args.append(tok.text)
            elif tok.kind == "int":
                args.append(int(tok.text))
            else:
                raise _ParseError(f"expected an argument, got {tok.text!r}", line.span_at(tok))
            tok = line.take()
            if tok.text == ")":
                return tuple(args)
            if tok.text != ",":
                raise _ParseError(f"expected ',' or ')', got {tok.text!r}", line.span_at(tok))

    def _binding_list(self, line: _Toks) -> tuple:
        pairs = []
        line.punct("(")
        if line.peek() and line.peek().text == ")":
            line.take()
            return tuple(pairs)
        while True:
            slot = line.name("a slot name")
            line.punct("=")
            value = line.name("an entity")
            pairs.append((slot, value))
            tok = line.take()
            if tok.text == ")":
                return tuple(pairs)
            if tok.text != ",":
                raise _ParseError(f"expected ',' or ')', got {tok.text!r}", line.span_at(tok))


def _parse_statements(parser: _Parser, dispatch) -> list:
    stmts = []
    while (line := parser._next_line()) is not None:
        span = line.span_at()
        try:
            kw_tok = line.take()
            if kw_tok.kind != "name":
                raise _ParseError(f"expected a statement keyword, got {kw_tok.text!r}", span)
            handler = dispatch.get(kw_tok.text)
            if handler is None:
                raise _ParseError(f"unknown statement '{kw_tok.text}'", span)
            stmt = handler(parser, line, span)
            if stmt is not None:
                stmts.append(stmt)
        except _ParseError as exc:
            parser._recover_line(exc, line)
    return stmts


# model statements ------------------------------------------------------


def _p_model(p: _Parser, line: _Toks, span) -> ModelHeader:
    name = line.name("a model name")
    line.done()
    return ModelHeader(name, span=span)


def _p_universal(p: _Parser, line: _Toks, span) -> UniversalStmt:
    name = line.name("a universal name")
    line.keyword("is_a")
    parent = line.name("a parent entity")
    line.done()
    return UniversalStmt(name, parent, span=span)


def _p_particular(p: _Parser, line: _Toks, span) -> ParticularStmt:
    name = line.name("a particular name")
    line.keyword("instance_of")
    universal = line.name("a universal")
    line.done()
    return ParticularStmt(name, universal, span=span)


def _p_relation(p: _Parser, line: _Toks, span) -> RelationStmt:
    name = line.name("a relation kind name")
    line.keyword("from")
    domain = line.name("a B entity")
    line.keyword("to")
    range_ = line.name("a B entity")
    line.done()
    return RelationStmt(name, domain, range_, span=span)


def _p_relate(p: _Parser, line: _Toks, span) -> RelateStmt:
    from_u = line.name("a universal")
    kind = line.name("a relation kind")
    to_u = line.name("a universal")
    line.done()
    return RelateStmt(from_u, kind, to_u, span=span)


def _p_transitional(p: _Parser, line: _Toks, span) -> TransitionalStmt:
    name = line.name("a transitional name")
    p._open_brace(line)
    unlinks, links = [], []
    while True:
        body = p._next_line()
        if body is None:
            raise _ParseError(f"unterminated transitional '{name}'", span)
        if body.peek() and body.peek().text == "}":
            body.take()
            body.done()
            break
        try:
            word = body.name("'link' or 'unlink'")
            if word == "unlink":
                unlinks.append(p._template(body))
            elif word == "link":
                links.append(p._template(body))
            else:
                raise _ParseError(f"expected 'link' or 'unlink', got '{word}'", body.span_at())
            body.done()
        except _ParseError as exc:
            p._recover_line(exc, body)
    return TransitionalStmt(name, tuple(unlinks), tuple(links), span=span)


def _p_frame(p: _Parser, line: _Toks, span) -> FrameStmt:
    name = line.name("a frame name")
    p._open_brace(line)
    slots, templates = [], []
    while True:
        body = p._next_line()
        if body is None:
            raise _ParseError(f"unterminated frame '{name}'", span)
        if body.peek() and body.peek().text == "}":
            body.take()
            body.done()
            break
        try:
            word = body.name("'slot' or 'link'")
            if word == "slot":
                slots.append(body.name("a slot name"))
            elif word == "link":
                templates.append(p._template(body))
            else:
                raise _ParseError(f"expected 'slot' or 'link', got '{word}'", body.span_at())
            body.done()
        except _ParseError as exc:
            p._recover_line(exc, body)
    return FrameStmt(name, tuple(slots), tuple(templates), span=span)


def _p_workflow(p: _Parser, line: _Toks, span, requires_agent=True) -> WorkflowStmt:
    name = line.name("a workflow name")
    params: tuple = ()
    if line.peek() and line.peek().text == "(":
        raw = p._arg_list(line)
        for a in raw:
            if not isinstance(a, str):
                raise _ParseError(f"parameter names must be identifiers, got {a!r}", span)
        params = raw
    p._open_brace(line)
    body, _ = _parse_body(p, name, span)
    return WorkflowStmt(name, params, requires_agent, body, span=span)


def _p_mechanism(p: _Parser, line: _Toks, span) -> WorkflowStmt:
    return _p_workflow(p, line, span, requires_agent=False)


def _parse_body(p: _Parser, owner: str, span) -> tuple[Seq, _Toks]:
    """Parse workflow body nodes until the matching '}'. Returns the Seq
    and the close line (positioned after '}') for else-continuations."""
    nodes = []
    while True:
        line = p._next_line()
        if line is None:
            raise _ParseError(f"unterminated block in '{owner}'", span)
        if line.peek() and line.peek().text == "}":
            line.take()
            return Seq(tuple(nodes)), line
        try:
            word = line.name("'step', 'loop' or 'if'")
            if word == "step":
                nodes.append(Step(_parse_step(p, line, owner)))
            elif word == "loop":
                nodes.append(_parse_loop(p, line, owner, span))
            elif word == "if":
                nodes.append(_parse_cond(p, line, owner, span))
            else:
                raise _ParseError(f"expected 'step', 'loop' or 'if', got '{word}'", line.span_at())
        except _ParseError as exc:
            p._recover_line(exc, line)


def _parse_step(p: _Parser, line: _Toks, owner: str) -> WorkflowStep:
    name = line.name("a step name")
    placeholder = False
    nxt = line.peek()
    if nxt is not None and nxt.kind == "name" and nxt.text == "placeholder":
        line.take()
        placeholder = True
    span = line.span_at()
    p._open_brace(line)
    agent = None
    duration: int | str = 0
    pre: list[StatePredicate] = []
    unlinks: list[LinkTemplate] = []
    links: list[LinkTemplate] = []
    while True:
        body = p._next_line()
        if body is None:
            raise _ParseError(f"unterminated step '{name}'", span)
        if body.peek() and body.peek().text == "}":
            body.take()
            body.done()
            break
        try:
            word = body.name("a step clause")
            if word == "agent":
                agent = body.name("an entity")
            elif word == "duration":
                tok = body.take()
                if tok.kind == "int":
                    duration = int(tok.text)
                elif tok.kind == "name":
                    duration = tok.text
                else:
                    raise _ParseError(f"expected a duration, got {tok.text!r}", body.span_at(tok))
            elif word == "require":
                pre.append(p._predicate(body))
            elif word == "effect":
                which = body.name("'link' or 'unlink'")
                if which == "unlink":
                    unlinks.append(p._template(body))
                elif which == "link":
                    links.append(p._template(body))
                else:
                    raise _ParseError(f"expected 'link' or 'unlink', got '{which}'", body.span_at())
            else:
                raise _ParseError(f"unknown step clause '{word}'", body.span_at())
            body.done()
        except _ParseError as exc:
            p._recover_line(exc, body)
    return WorkflowStep(
        name, agent, duration, tuple(pre), tuple(unlinks), tuple(links), placeholder
    )


def _parse_loop(p: _Parser, line: _Toks, owner: str, span) -> Loop:
    count = None
    guard = None
    until_end = False
    nxt = line.peek()
    if nxt is not None and nxt.kind == "int":
        count = int(line.take().text)
    elif nxt is not None and nxt.kind == "name" and nxt.text == "until":
        line.take()
        after = line.peek()
        if after is not None and after.kind == "name" and after.text == "end":
            line.take()
            until_end = True
        else:
            guard = p._predicate(line)
    p._open_brace(line)
    body, _ = _parse_body(p, owner, span)
    return Loop(body, count, guard, until_end)


def _parse_cond(p: _Parser, line: _Toks, owner: str, span) -> Cond:
    guard = p._predicate(line)
    p._open_brace(line)
    then_body, close = _parse_body(p, owner, span)
    else_body = None
    if close.peek() is not None:
        close.keyword("else")
        close.punct("{")
        close.done()
        else_body, _ = _parse_body(p, owner, span)
    return Cond(guard, then_body, else_body)


def _p_rule(p: _Parser, line: _Toks, span) -> RuleStmt:
    name = line.name("a rule name")
    p._open_brace(line)
    when: list[StatePredicate] = []
    then: RuleAction | None = None
    while True:
        body = p._next_line()
        if body is None:
            raise _ParseError(f"unterminated rule '{name}'", span)
        if body.peek() and body.peek().text == "}":
            body.take()
            body.done()
            break
        try:
            word = body.name("'when' or 'then'")
            if word == "when":
                when.append(p._predicate(body))
            elif word == "then":
                if then is not None:
                    raise _ParseError(f"rule '{name}' has more than one 'then'", body.span_at())
                then = _parse_action(p, body)
            else:
                raise _ParseError(f"expected 'when' or 'then', got '{word}'", body.span_at())
            body.done()
        except _ParseError as exc:
            p._recover_line(exc, body)
    if not when:
        raise _ParseError(f"rule '{name}' has no 'when' clause", span)
    if then is None:
        raise _ParseError(f"rule '{name}' has no 'then' clause", span)
    return RuleStmt(name, tuple(when), then, span=span)


def _parse_action(p: _Parser, line: _Toks) -> RuleAction:
    word = line.name("an action")
    if word == "start_workflow":
        target = line.name("a workflow")
        args = p._arg_list(line) if line.peek() and line.peek().text == "(" else ()
        return RuleAction("start_workflow", target, args=args)
    if word == "apply_transitional":
        return RuleAction("apply_transitional", line.name("a transitional"))
    if word in ("activate_frame", "deactivate_frame"):
        target = line.name("a frame")
        binding = p._binding_list(line)
        return RuleAction(word, target, binding=tuple(sorted(binding)))
    raise _ParseError(f"unknown action '{word}'", line.span_at())


_MODEL_DISPATCH = {
    "model": _p_model,
    "universal": _p_universal,
    "particular": _p_particular,
    "relation": _p_relation,
    "relate": _p_relate,
    "transitional": _p_transitional,
    "frame": _p_frame,
    "workflow": _p_workflow,
    "mechanism": _p_mechanism,
    "rule": _p_rule,
}


# scenario statements ---------------------------------------------------


def _p_scenario(p: _Parser, line: _Toks, span) -> ScenarioHeader:
    name = line.name("a scenario name")
    line.done()
    return ScenarioHeader(name, span=span)


def _p_horizon(p: _Parser, line: _Toks, span) -> HorizonStmt:
    value = line.integer("a horizon tick")
    line.done()
    return HorizonStmt(value, span=span)


def _p_init(p: _Parser, line: _Toks, span) -> InitStmt:
    t = p._template(line)
    line.done()
    return InitStmt(t, span=span)


def _at_clause(line: _Toks) -> int:
    line.keyword("at")
    at = line.integer("a tick")
    line.done()
    return at


def _p_run(p: _Parser, line: _Toks, span) -> RunStmt:
    wf = line.name("a workflow")
    args = p._arg_list(line) if line.peek() and line.peek().text == "(" else ()
    return RunStmt(wf, args, _at_clause(line), span=span)


def _p_rule_ref(p: _Parser, line: _Toks, span) -> RuleRefStmt:
    name = line.name("a rule name")
    line.done()
    return RuleRefStmt(name, span=span)


def _p_activate(p: _Parser, line: _Toks, span) -> ActivateStmt:
    frame = line.name("a frame")
    binding = p._binding_list(line)
    return ActivateStmt(frame, binding, _at_clause(line), span=span)


def _p_deactivate(p: _Parser, line: _Toks, span) -> DeactivateStmt:
    frame = line.name("a frame")
    binding = p._binding_list(line)
    return DeactivateStmt(frame, binding, _at_clause(line), span=span)


def _p_apply(p: _Parser, line: _Toks, span) -> ApplyStmt:
    name = line.name("a transitional")
    return ApplyStmt(name, _at_clause(line), span=span)


def _p_interrupt(p: _Parser, line: _Toks, span) -> InterruptStmt:
    run = line.integer("a run ordinal")
    return InterruptStmt(run, _at_clause(line), span=span)


_SCENARIO_DISPATCH = {
    "scenario": _p_scenario,
    "horizon": _p_horizon,
    "init": _p_init,
    "run": _p_run,
    "rule": _p_rule_ref,
    "activate": _p_activate,
    "deactivate": _p_deactivate,
    "apply": _p_apply,
    "interrupt": _p_interrupt,
}


def parse_model(text: str, file: str = "<model>") -> ParseResult:
    p = _Parser(text, file)
    stmts = _parse_statements(p, _MODEL_DISPATCH)
    return ParseResult(ModelDocument(tuple(stmts)), tuple(p.diags))


def parse_scenario(text: str, file: str = "<scenario>") -> ParseResult:
    p = _Parser(text, file)
    stmts = _parse_statements(p, _SCENARIO_DISPATCH)
    return ParseResult(ScenarioDocument(tuple(stmts)), tuple(p.diags))


# ----------------------------------------------------------------------
# pretty printer


def _fmt_pred(pred: StatePredicate) -> str:
    return pred.render()


def _fmt_action(a: RuleAction) -> str:
    return a.render()


def _fmt_node(node, indent: int, out: list[str]) -> None:
    pad = "  " * indent
    if isinstance(node, Step):
        s = node.step
        head = f"{pad}step {s.name}" + (" placeholder" if s.placeholder else "") + " {"
        out.append(head)
        inner = "  " * (indent + 1)
        if s.agent_ref is not None:
            out.append(f"{inner}agent {s.agent_ref}")
        out.append(f"{inner}duration {s.duration}")
        for pred in s.preconditions:
            out.append(f"{inner}require {_fmt_pred(pred)}")
        for t in s.unlinks:
            out.append(f"{inner}effect unlink {t}")
        for t in s.links:
            out.append(f"{inner}effect link {t}")
        out.append(f"{pad}}}")
    elif isinstance(node, Loop):
        if node.count is not None:
            head = f"{pad}loop {node.count} {{"
        elif node.until_end:
            head = f"{pad}loop until end {{"
        elif node.guard is not None:
            head = f"{pad}loop until {_fmt_pred(node.guard)} {{"
        else:
            head = f"{pad}loop {{"
        out.append(head)
        for item in node.body.items:
            _fmt_node(item, indent + 1, out)
        out.append(f"{pad}}}")
    elif isinstance(node, Cond):
        out.append(f"{pad}if {_fmt_pred(node.guard)} {{")
        for item in node.then_body.items:
            _fmt_node(item, indent + 1, out)
        if node.else_body is not None:
            out.append(f"{pad}}} else {{")
            for item in node.else_body.items:
                _fmt_node(item, indent + 1, out)
        out.append(f"{pad}}}")
    elif isinstance(node, Seq):
        for item in node.items:
            _fmt_node(item, indent, out)


def print_model(doc: ModelDocument) -> str:
    out: list[str] = []
    for s in doc.statements:
        if isinstance(s, ModelHeader):
            out.append(f"model {s.name}")
        elif isinstance(s, UniversalStmt):
            out.append(f"universal {s.name} is_a {s.parent}")
        elif isinstance(s, ParticularStmt):
            out.append(f"particular {s.name} instance_of {s.universal}")
        elif isinstance(s, RelationStmt):
            out.append(f"relation {s.name} from {s.domain} to {s.range_}")
        elif isinstance(s, RelateStmt):
            out.append(f"relate {s.from_u} {s.kind} {s.to_u}")
        elif isinstance(s, TransitionalStmt):
            out.append(f"transitional {s.name} {{")
            for t in s.unlinks:
                out.append(f"  unlink {t}")
            for t in s.links:
                out.append(f"  link {t}")
            out.append("}")
        elif isinstance(s, FrameStmt):
            out.append(f"frame {s.name} {{")
            for slot in s.slots:
                out.append(f"  slot {slot}")
            for t in s.templates:
                out.append(f"  link {t}")
            out.append("}")
        elif isinstance(s, WorkflowStmt):
            kw = "workflow" if s.requires_agent else "mechanism"
            params = f"({', '.join(s.params)})" if s.params else ""
            out.append(f"{kw} {s.name}{params} {{")
            for item in s.body.items:
                _fmt_node(item, 1, out)
            out.append("}")
        elif isinstance(s, RuleStmt):
            out.append(f"rule {s.name} {{")
            for pred in s.when:
                out.append(f"  when {_fmt_pred(pred)}")
            out.append(f"  then {_fmt_action(s.then)}")
            out.append("}")
    return "\n".join(out) + "\n"


def _fmt_binding(binding) -> str:
    return ", ".join(f"{k}={v}" for k, v in binding)


def print_scenario(doc: ScenarioDocument) -> str:
    out: list[str] = []
    for s in doc.statements:
        if isinstance(s, ScenarioHeader):
            out.append(f"scenario {s.name}")
        elif isinstance(s, HorizonStmt):
            out.append(f"horizon {s.value}")
        elif isinstance(s, InitStmt):
            out.append(f"init {s.template}")
        elif isinstance(s, RunStmt):
            args = ", ".join(str(a) for a in s.args)
            out.append(f"run {s.workflow}({args}) at {s.at}")
        elif isinstance(s, RuleRefStmt):
            out.append(f"rule {s.name}")
        elif isinstance(s, ActivateStmt):
            out.append(f"activate {s.frame}({_fmt_binding(s.binding)}) at {s.at}")
        elif isinstance(s, DeactivateStmt):
            out.append(f"deactivate {s.frame}({_fmt_binding(s.binding)}) at {s.at}")
        elif isinstance(s, ApplyStmt):
            out.append(f"apply {s.transitional} at {s.at}")
        elif isinstance(s, InterruptStmt):
            out.append(f"interrupt {s.run} at {s.at}")
    return "\n".join(out) + "\n"
