"""Recursive-descent parser for RT-lite.

``parse`` returns the model, a span table mapping every ElementId to the
byte range of its full declaration (including the trailing ``;`` or closing
``}``), the diagnostics, and the reference sites used for go-to-definition.
Syntax errors are reported as E010 and recovery skips to the next ``;`` or
``}``; if any E0xx diagnostic occurred the model and span table are absent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .lexer import (
    T_ARROW,
    T_COLON,
    T_DOT,
    T_EOF,
    T_IDENT,
    T_KEYWORD,
    T_LBRACE,
    T_LBRACKET,
    T_RAW,
    T_RBRACE,
    T_RBRACKET,
    T_SEMI,
    T_SLASH,
    T_TILDE,
    Token,
    tokenize,
)
from .model import (
    KIND_CAPSULE,
    KIND_MSG,
    KIND_PART,
    KIND_PORT,
    KIND_PROTOCOL,
    KIND_STATE,
    SEVERITY_ERROR,
    SM_SEGMENT,
    CapsuleDecl,
    ConnectorDecl,
    Diagnostic,
    ElementId,
    InitialDecl,
    MessageDecl,
    Model,
    PortDecl,
    PortRef,
    PartDecl,
    ProtocolDecl,
    Region,
    SourceSpan,
    StateDecl,
    StateMachine,
    TransitionDecl,
    Trigger,
    element_id_of,
    find_capsule,
    find_part,
    find_port,
    find_protocol,
    find_state,
    iter_elements,
    sort_diagnostics,
)

SpanTable = dict[ElementId, SourceSpan]

REF_PROTOCOL = "protocol"
REF_CAPSULE = "capsule"
REF_STATE = "state"
REF_PORT = "port"
REF_MESSAGE = "message"
REF_PART = "part"
REF_PART_PORT = "part_port"


@dataclass(frozen=True)
class RefSite:
    """A name token that references a declaration elsewhere in the model."""

    span: SourceSpan
    kind: str
    context: tuple[str, ...]


@dataclass
class ParseResult:
    model: Model | None
    spans: SpanTable | None
    diagnostics: list[Diagnostic]
    references: list[RefSite] = field(default_factory=list)


def parse(text: str) -> ParseResult:
    tokens, diags = tokenize(text)
    parser = _Parser(tokens, diags)
    model = parser.parse_document()
    diagnostics = sort_diagnostics(parser.diags)
    if any(d.severity == SEVERITY_ERROR for d in diagnostics):
        return ParseResult(None, None, diagnostics)
    spans: SpanTable = {
        entry.element_id: entry.element.span for entry in iter_elements(model)
    }
    return ParseResult(model, spans, diagnostics, parser.refs)


def resolve_reference(model: Model, site: RefSite) -> ElementId | None:
    """The id of the declaration a reference site points at, or None."""
    ctx = site.context
    if site.kind == REF_PROTOCOL:
        model_name, name = ctx
        if find_protocol(model, name) is None:
            return None
        return element_id_of(KIND_PROTOCOL, [model_name, name])
    if site.kind == REF_CAPSULE:
        model_name, name = ctx
        if find_capsule(model, name) is None:
            return None
        return element_id_of(KIND_CAPSULE, [model_name, name])
    if site.kind == REF_PORT:
        model_name, capsule_name, port_name = ctx
        capsule = find_capsule(model, capsule_name)
        if capsule is None or find_port(capsule, port_name) is None:
            return None
        return element_id_of(KIND_PORT, [model_name, capsule_name, port_name])
    if site.kind == REF_PART:
        model_name, capsule_name, part_name = ctx
        capsule = find_capsule(model, capsule_name)
        if capsule is None or find_part(capsule, part_name) is None:
            return None
        return element_id_of(KIND_PART, [model_name, capsule_name, part_name])
    if site.kind == REF_PART_PORT:
        model_name, capsule_name, part_name, port_name = ctx
        capsule = find_capsule(model, capsule_name)
        part = find_part(capsule, part_name) if capsule else None
        target = find_capsule(model, part.capsule_name) if part else None
        if target is None or find_port(target, port_name) is None:
            return None
        return element_id_of(KIND_PORT, [model_name, target.name, port_name])
    if site.kind == REF_MESSAGE:
        model_name, capsule_name, port_name, message_name = ctx
        capsule = find_capsule(model, capsule_name)
        port = find_port(capsule, port_name) if capsule else None
        proto = find_protocol(model, port.protocol_name) if port else None
        if proto is None or all(m.name != message_name for m in proto.messages):
            return None
        return element_id_of(KIND_MSG, [model_name, proto.name, message_name])
    if site.kind == REF_STATE:
        *path, state_name = ctx
        region = _region_at(model, list(path))
        if region is None or find_state(region, state_name) is None:
            return None
        return element_id_of(KIND_STATE, list(path) + [state_name])
    return None


def _region_at(model: Model, path: list[str]) -> Region | None:
    """The region at [model, capsule, 'sm', composite...], or None."""
    if len(path) < 3 or path[0] != model.name or path[2] != SM_SEGMENT:
        return None
    capsule = find_capsule(model, path[1])
    if capsule is None or capsule.machine is None:
        return None
    region = capsule.machine.region
    for name in path[3:]:
        state = find_state(region, name)
        if state is None or state.region is None:
            return None
        region = state.region
    return region


class _ParseError(Exception):
    """Raised after an E010 has been recorded; recovery happens upstream."""


class _Parser:
    def __init__(self, tokens: list[Token], diags: list[Diagnostic]):
        self.tokens = tokens
        self.pos = 0
        self.diags = diags
        self.refs: list[RefSite] = []

    # -- token plumbing -----------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != T_EOF:
            self.pos += 1
        return tok

    def at_keyword(self, word: str) -> bool:
        tok = self.peek()
        return tok.kind == T_KEYWORD and tok.text == word

    def error(self, message: str, token: Token | None = None) -> None:
        tok = token if token is not None else self.peek()
        self.diags.append(Diagnostic("E010", SEVERITY_ERROR, tok.span, message))

    def fail(self, message: str) -> None:
        self.error(message)
        raise _ParseError()

    def expect(self, kind: str, what: str) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            self.fail(f"expected {what}, found {_describe(tok)}")
        return self.advance()

    def expect_keyword(self, word: str) -> Token:
        tok = self.peek()
        if not self.at_keyword(word):
            self.fail(f"expected '{word}', found {_describe(tok)}")
        return self.advance()

    def expect_ident(self, what: str = "identifier") -> Token:
        return self.expect(T_IDENT, what)

    def recover(self) -> None:
        """Skip to just after the next ';', or stop before '}' / end of input."""
        while True:
            tok = self.peek()
            if tok.kind == T_EOF or tok.kind == T_RBRACE:
                return
            self.advance()
            if tok.kind == T_SEMI:
                return

    # -- grammar ------------------------------------------------------------

    def parse_document(self) -> Model:
        model = Model("_")
        try:
            start = self.expect_keyword("model")
            model.name = self.expect_ident("model name").text
            self.expect(T_LBRACE, "'{'")
        except _ParseError:
            self.recover()
            return model
        end = self._parse_model_body(model)
        model.span = SourceSpan(start.start, end)
        if self.peek().kind != T_EOF:
            self.error(f"expected end of input, found {_describe(self.peek())}")
        return model

    def _parse_model_body(self, model: Model) -> int:
        while True:
            tok = self.peek()
            if tok.kind == T_RBRACE:
                self.advance()
                return tok.end
            if tok.kind == T_EOF:
                self.error("unexpected end of input")
                return tok.end
            try:
                if self.at_keyword("protocol"):
                    model.protocols.append(self.parse_protocol())
                elif self.at_keyword("capsule"):
                    model.capsules.append(self.parse_capsule(model))
                else:
                    self.fail(f"expected declaration, found {_describe(tok)}")
            except _ParseError:
                self.recover()

    def parse_protocol(self) -> ProtocolDecl:
        start = self.expect_keyword("protocol")
        proto = ProtocolDecl(self.expect_ident("protocol name").text)
        self.expect(T_LBRACE, "'{'")
        while True:
            tok = self.peek()
            if tok.kind == T_RBRACE:
                self.advance()
                proto.span = SourceSpan(start.start, tok.end)
                return proto
            if tok.kind == T_EOF:
                self.error("unexpected end of input")
                proto.span = SourceSpan(start.start, tok.end)
                return proto
            try:
                if self.at_keyword("in") or self.at_keyword("out"):
                    direction = self.advance()
                    self.expect_keyword("msg")
                    name = self.expect_ident("message name")
                    semi = self.expect(T_SEMI, "';'")
                    proto.messages.append(
                        MessageDecl(
                            name.text,
                            direction.text,
                            span=SourceSpan(direction.start, semi.end),
                        )
                    )
                else:
                    self.fail(f"expected message declaration, found {_describe(tok)}")
            except _ParseError:
                self.recover()

    def parse_capsule(self, model: Model) -> CapsuleDecl:
        start = self.expect_keyword("capsule")
        capsule = CapsuleDecl(self.expect_ident("capsule name").text)
        self.expect(T_LBRACE, "'{'")
        while True:
            tok = self.peek()
            if tok.kind == T_RBRACE:
                self.advance()
                capsule.span = SourceSpan(start.start, tok.end)
                return capsule
            if tok.kind == T_EOF:
                self.error("unexpected end of input")
                capsule.span = SourceSpan(start.start, tok.end)
                return capsule
            try:
                if self.at_keyword("port"):
                    capsule.ports.append(self.parse_port(model, capsule))
                elif self.at_keyword("part"):
                    capsule.parts.append(self.parse_part(model))
                elif self.at_keyword("connect"):
                    capsule.connectors.append(self.parse_connector(model, capsule))
                elif self.at_keyword("statemachine"):
                    machine = self.parse_state_machine(model, capsule)
                    if capsule.machine is None:
                        capsule.machine = machine
                    else:
                        capsule.extra_machines.append(machine)
                else:
                    self.fail(f"expected capsule item, found {_describe(tok)}")
            except _ParseError:
                self.recover()

    def parse_port(self, model: Model, capsule: CapsuleDecl) -> PortDecl:
        start = self.expect_keyword("port")
        name = self.expect_ident("port name")
        self.expect(T_COLON, "':'")
        conjugated = False
        if self.peek().kind == T_TILDE:
            self.advance()
            conjugated = True
        proto = self.expect_ident("protocol name")
        semi = self.expect(T_SEMI, "';'")
        self.refs.append(
            RefSite(proto.span, REF_PROTOCOL, (model.name, proto.text))
        )
        return PortDecl(
            name.text, proto.text, conjugated, span=SourceSpan(start.start, semi.end)
        )

    def parse_part(self, model: Model) -> PartDecl:
        start = self.expect_keyword("part")
        name = self.expect_ident("part name")
        self.expect(T_COLON, "':'")
        type_name = self.expect_ident("capsule name")
        semi = self.expect(T_SEMI, "';'")
        self.refs.append(
            RefSite(type_name.span, REF_CAPSULE, (model.name, type_name.text))
        )
        return PartDecl(name.text, type_name.text, span=SourceSpan(start.start, semi.end))

    def parse_connector(self, model: Model, capsule: CapsuleDecl) -> ConnectorDecl:
        start = self.expect_keyword("connect")
        end_a = self.parse_port_ref(model, capsule)
        self.expect_keyword("to")
        end_b = self.parse_port_ref(model, capsule)
        semi = self.expect(T_SEMI, "';'")
        return ConnectorDecl(end_a, end_b, span=SourceSpan(start.start, semi.end))

    def parse_port_ref(self, model: Model, capsule: CapsuleDecl) -> PortRef:
        first = self.expect_ident("port reference")
        if self.peek().kind != T_DOT:
            self.refs.append(
                RefSite(first.span, REF_PORT, (model.name, capsule.name, first.text))
            )
            return PortRef(first.text)
        self.advance()
        port = self.expect_ident("port name")
        self.refs.append(
            RefSite(first.span, REF_PART, (model.name, capsule.name, first.text))
        )
        self.refs.append(
            RefSite(
                port.span,
                REF_PART_PORT,
                (model.name, capsule.name, first.text, port.text),
            )
        )
        return PortRef(port.text, first.text)

    def parse_state_machine(self, model: Model, capsule: CapsuleDecl) -> StateMachine:
        start = self.expect_keyword("statemachine")
        self.expect(T_LBRACE, "'{'")
        machine = StateMachine()
        path = (model.name, capsule.name, SM_SEGMENT)
        end = self.parse_region_body(model, capsule, machine.region, path)
        machine.span = SourceSpan(start.start, end)
        return machine

    def parse_region_body(
        self, model: Model, capsule: CapsuleDecl, region: Region, path: tuple[str, ...]
    ) -> int:
        """Items up to and including the closing '}'; returns its end offset."""
        while True:
            tok = self.peek()
            if tok.kind == T_RBRACE:
                self.advance()
                return tok.end
            if tok.kind == T_EOF:
                self.error("unexpected end of input")
                return tok.end
            try:
                if self.at_keyword("state"):
                    region.states.append(self.parse_state(model, capsule, path))
                elif self.at_keyword("initial"):
                    decl = self.parse_initial(path)
                    if region.initial is None:
                        region.initial = decl
                    else:
                        region.extra_initials.append(decl)
                elif tok.kind == T_IDENT:
                    region.transitions.append(
                        self.parse_transition(model, capsule, path)
                    )
                else:
                    self.fail(
                        f"expected state, initial or transition, found {_describe(tok)}"
                    )
            except _ParseError:
                self.recover()

    def parse_state(
        self, model: Model, capsule: CapsuleDecl, path: tuple[str, ...]
    ) -> StateDecl:
        start = self.expect_keyword("state")
        name = self.expect_ident("state name")
        tok = self.peek()
        if tok.kind == T_SEMI:
            self.advance()
            return StateDecl(name.text, span=SourceSpan(start.start, tok.end))
        if tok.kind == T_LBRACE:
            self.advance()
            state = StateDecl(name.text, Region())
            end = self.parse_region_body(
                model, capsule, state.region, path + (name.text,)
            )
            state.span = SourceSpan(start.start, end)
            return state
        self.fail(f"expected ';' or '{{', found {_describe(tok)}")

    def parse_initial(self, path: tuple[str, ...]) -> InitialDecl:
        start = self.expect_keyword("initial")
        self.expect(T_ARROW, "'->'")
        target = self.expect_ident("state name")
        semi = self.expect(T_SEMI, "';'")
        self.refs.append(RefSite(target.span, REF_STATE, path + (target.text,)))
        return InitialDecl(target.text, span=SourceSpan(start.start, semi.end))

    def parse_transition(
        self, model: Model, capsule: CapsuleDecl, path: tuple[str, ...]
    ) -> TransitionDecl:
        source = self.expect_ident("state name")
        self.expect(T_ARROW, "'->'")
        target = self.expect_ident("state name")
        self.refs.append(RefSite(source.span, REF_STATE, path + (source.text,)))
        self.refs.append(RefSite(target.span, REF_STATE, path + (target.text,)))
        trans = TransitionDecl(source.text, target.text)

        if self.at_keyword("on"):
            self.advance()
            port = self.expect_ident("port name")
            self.expect(T_DOT, "'.'")
            message = self.expect_ident("message name")
            self.refs.append(
                RefSite(port.span, REF_PORT, (model.name, capsule.name, port.text))
            )
            self.refs.append(
                RefSite(
                    message.span,
                    REF_MESSAGE,
                    (model.name, capsule.name, port.text, message.text),
                )
            )
            trans.trigger = Trigger(port.text, message.text)

        if self.peek().kind == T_LBRACKET:
            self.advance()
            raw = self.expect(T_RAW, "guard text")
            self.expect(T_RBRACKET, "']'")
            trans.guard = raw.text.strip() or None

        if self.peek().kind == T_SLASH:
            self.advance()
            raw = self.expect(T_RAW, "action text")
            trans.action = raw.text.strip() or None

        semi = self.expect(T_SEMI, "';'")
        trans.span = SourceSpan(source.start, semi.end)
        return trans


def _describe(tok: Token) -> str:
    if tok.kind == T_EOF:
        return "end of input"
    return f"'{tok.text}'"
