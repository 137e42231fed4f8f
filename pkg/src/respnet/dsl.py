"""Lexer, parser, and canonical serializer for the .resp scenario language.

One statement per line (semicolons also terminate statements), comments
from '#' to end of line.  The parser recovers at statement boundaries, so
several independent mistakes surface in a single pass, each with the span
of the offending token.

serialize() emits the canonical form: statements grouped by kind, sorted
within each group, with two-space indentation inside the model block.
Parsing the canonical form and rebuilding yields an equal scenario.
"""

from __future__ import annotations

from dataclasses import dataclass

from .causal import And, Const, Expr, Not, Or, Var
from .diagnostics import Diagnostic, Severity, SourceSpan
from .model import (
    CONDITION_NAMES,
    ActorDecl,
    ActorKind,
    AttributionDecl,
    CausesDecl,
    CIVIL_BRANCHES,
    Declaration,
    FactDecl,
    LEGAL_DUTY_BASES,
    Mode,
    ModelDecl,
    MORAL_SUBKINDS,
    NoteDecl,
    OccurrenceDecl,
    OccurrenceKind,
    ROLE_SUBKINDS,
    Scenario,
    Sense,
    Value,
)

HEADER = "# respnet 1"

_PUNCT = {
    "->": "ARROW",
    "{": "LBRACE",
    "}": "RBRACE",
    "(": "LPAREN",
    ")": "RPAREN",
    "=": "EQ",
    ",": "COMMA",
    ":": "COLON",
    "|": "PIPE",
    "&": "AMP",
    "!": "BANG",
}

_ESCAPES = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}
_UNESCAPES = {"\n": "\\n", "\t": "\\t", '"': '\\"', "\\": "\\\\"}


@dataclass(frozen=True)
class Token:
    type: str  # ID, STRING, NEWLINE, EOF, or a punctuation name
    text: str
    span: SourceSpan


class ParseError(Exception):
    def __init__(self, code: str, message: str, span: SourceSpan):
        super().__init__(message)
        self.code = code
        self.message = message
        self.span = span


def _is_id_start(ch: str) -> bool:
    return ch == "_" or "a" <= ch <= "z"


def _is_id_char(ch: str) -> bool:
    return _is_id_start(ch) or "0" <= ch <= "9"


def tokenize(source: str, file: str = "<string>") -> tuple[list[Token], list[Diagnostic]]:
    tokens: list[Token] = []
    diagnostics: list[Diagnostic] = []
    line, col, i = 1, 1, 0
    text = source

    def span(length: int, at_line: int | None = None, at_col: int | None = None) -> SourceSpan:
        return SourceSpan(file, at_line or line, at_col or col, length)

    while i < len(text):
        ch = text[i]
        if ch == "\r":
            if i + 1 < len(text) and text[i + 1] == "\n":
                i += 1
            tokens.append(Token("NEWLINE", "\n", span(1)))
            i += 1
            line += 1
            col = 1
            continue
        if ch == "\n":
            tokens.append(Token("NEWLINE", "\n", span(1)))
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < len(text) and text[i] not in "\r\n":
                i += 1
                col += 1
            continue
        if ch == ";":
            tokens.append(Token("NEWLINE", ";", span(1)))
            i += 1
            col += 1
            continue
        if ch == "-" and i + 1 < len(text) and text[i + 1] == ">":
            tokens.append(Token("ARROW", "->", span(2)))
            i += 2
            col += 2
            continue
        if ch in _PUNCT:
            tokens.append(Token(_PUNCT[ch], ch, span(1)))
            i += 1
            col += 1
            continue
        if _is_id_start(ch):
            start_i, start_col = i, col
            while i < len(text) and _is_id_char(text[i]):
                i += 1
                col += 1
            word = text[start_i:i]
            tokens.append(Token("ID", word, span(len(word), line, start_col)))
            continue
        if ch == '"':
            start_line, start_col = line, col
            i += 1
            col += 1
            value: list[str] = []
            closed = False
            while i < len(text):
                ch = text[i]
                if ch in "\r\n":
                    break
                if ch == "\\":
                    if i + 1 < len(text) and text[i + 1] in _ESCAPES:
                        value.append(_ESCAPES[text[i + 1]])
                        i += 2
                        col += 2
                        continue
                    diagnostics.append(
                        Diagnostic(
                            Severity.ERROR,
                            "E_LEX",
                            f"bad escape sequence at {file}:{line}:{col}",
                            (),
                            span(2),
                        )
                    )
                    i += 2
                    col += 2
                    continue
                if ch == '"':
                    closed = True
                    i += 1
                    col += 1
                    break
                value.append(ch)
                i += 1
                col += 1
            if not closed:
                diagnostics.append(
                    Diagnostic(
                        Severity.ERROR,
                        "E_LEX",
                        "unterminated string literal",
                        (),
                        SourceSpan(file, start_line, start_col, col - start_col),
                    )
                )
            tokens.append(
                Token(
                    "STRING",
                    "".join(value),
                    SourceSpan(file, start_line, start_col, col - start_col),
                )
            )
            continue
        diagnostics.append(
            Diagnostic(
                Severity.ERROR,
                "E_LEX",
                f"bad token {ch!r}",
                (),
                span(1),
            )
        )
        i += 1
        col += 1
    tokens.append(Token("EOF", "", SourceSpan(file, line, col, 0)))
    return tokens, diagnostics


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        token = self.tokens[self.pos]
        if token.type != "EOF":
            self.pos += 1
        return token

    def at(self, type_: str, text: str | None = None) -> bool:
        token = self.peek()
        return token.type == type_ and (text is None or token.text == text)

    def expect(self, type_: str, what: str) -> Token:
        token = self.peek()
        if token.type != type_:
            raise ParseError(
                "E_SYN",
                f"expected {what}, found {token.text!r}" if token.text else f"expected {what}",
                token.span,
            )
        return self.advance()

    def expect_keyword(self, word: str) -> Token:
        token = self.peek()
        if token.type != "ID" or token.text != word:
            raise ParseError(
                "E_SYN",
                f"expected {word!r}, found {token.text!r}" if token.text else f"expected {word!r}",
                token.span,
            )
        return self.advance()

    def expect_id(self, what: str = "an identifier") -> Token:
        return self.expect("ID", what)

    def skip_newlines(self) -> None:
        while self.at("NEWLINE"):
            self.advance()

    def sync_to_statement(self) -> None:
        """Recovery point: consume up to and including the next line break."""
        while not self.at("NEWLINE") and not self.at("EOF"):
            self.advance()
        if self.at("NEWLINE"):
            self.advance()

    def end_statement(self) -> None:
        token = self.peek()
        if token.type in ("NEWLINE", "EOF"):
            if token.type == "NEWLINE":
                self.advance()
            return
        raise ParseError(
            "E_SYN", f"unexpected {token.text!r} after statement", token.span
        )

    # -- boolean values and expressions --------------------------------------

    def parse_bool(self) -> bool:
        token = self.peek()
        if token.type == "ID" and token.text in ("true", "false"):
            self.advance()
            return token.text == "true"
        raise ParseError("E_SYN", "expected 'true' or 'false'", token.span)

    def parse_expr(self) -> Expr:
        expr = self.parse_term()
        while self.at("PIPE"):
            self.advance()
            expr = Or(expr, self.parse_term())
        return expr

    def parse_term(self) -> Expr:
        expr = self.parse_factor()
        while self.at("AMP"):
            self.advance()
            expr = And(expr, self.parse_factor())
        return expr

    def parse_factor(self) -> Expr:
        token = self.peek()
        if token.type == "BANG":
            self.advance()
            return Not(self.parse_factor())
        if token.type == "LPAREN":
            self.advance()
            expr = self.parse_expr()
            self.expect("RPAREN", "')'")
            return expr
        if token.type == "ID":
            self.advance()
            if token.text == "true":
                return Const(True)
            if token.text == "false":
                return Const(False)
            return Var(token.text)
        raise ParseError(
            "E_SYN", "expected a variable, 'true', 'false', '!' or '('", token.span
        )

    # -- senses ---------------------------------------------------------------

    def parse_sense(self) -> Sense:
        token = self.expect_id("a sense (causal, role, liability, moral)")
        if token.text == "causal":
            return Sense("causal")
        if token.text not in ("role", "liability", "moral"):
            raise ParseError(
                "E_SYN",
                f"unknown sense {token.text!r}; expected causal, role, liability or moral",
                token.span,
            )
        kind = token.text
        self.expect("LPAREN", "'('")
        sub = self.expect_id("a subkind")
        allowed = {
            "role": ROLE_SUBKINDS,
            "liability": ("criminal", "civil"),
            "moral": MORAL_SUBKINDS,
        }[kind]
        if sub.text not in allowed:
            raise ParseError(
                "E_SYN",
                f"unknown {kind} subkind {sub.text!r}; expected one of: "
                + ", ".join(allowed),
                sub.span,
            )
        qualifier: str | None = None
        if self.at("COLON"):
            colon = self.advance()
            if sub.text == "legal_duty":
                basis = self.expect_id("a legal-duty basis")
                if basis.text not in LEGAL_DUTY_BASES:
                    raise ParseError(
                        "E_SYN",
                        f"unknown legal-duty basis {basis.text!r}; expected one of: "
                        + ", ".join(LEGAL_DUTY_BASES),
                        basis.span,
                    )
                qualifier = basis.text
            elif sub.text == "civil":
                branch = self.expect_id("a civil branch")
                if branch.text not in CIVIL_BRANCHES:
                    raise ParseError(
                        "E_SYN",
                        f"unknown civil branch {branch.text!r}; expected one of: "
                        + ", ".join(CIVIL_BRANCHES),
                        branch.span,
                    )
                qualifier = branch.text
            else:
                raise ParseError(
                    "E_SYN", f"subkind {sub.text!r} takes no qualifier", colon.span
                )
        self.expect("RPAREN", "')'")
        return Sense(kind, sub.text, qualifier)

    # -- statements -------------------------------------------------------------

    def parse_actor(self) -> ActorDecl:
        keyword = self.expect_keyword("actor")
        name = self.expect_id()
        self.expect_keyword("kind")
        kind_token = self.expect_id("an actor kind")
        try:
            kind = ActorKind(kind_token.text)
        except ValueError:
            raise ParseError(
                "E_SYN",
                f"unknown actor kind {kind_token.text!r}; expected one of: "
                + ", ".join(k.value for k in ActorKind),
                kind_token.span,
            )
        label = ""
        if self.at("STRING"):
            label = self.advance().text
        self.end_statement()
        return ActorDecl(name.text, kind, label, keyword.span)

    def parse_occurrence(self) -> OccurrenceDecl:
        keyword = self.expect_keyword("occurrence")
        name = self.expect_id()
        self.expect_keyword("kind")
        kind_token = self.expect_id("an occurrence kind")
        try:
            kind = OccurrenceKind(kind_token.text)
        except ValueError:
            raise ParseError(
                "E_SYN",
                f"unknown occurrence kind {kind_token.text!r}; expected one of: "
                + ", ".join(k.value for k in OccurrenceKind),
                kind_token.span,
            )
        producer = None
        if self.at("ID", "by"):
            self.advance()
            producer = self.expect_id().text
        label = ""
        if self.at("STRING"):
            label = self.advance().text
        harm = False
        if self.at("ID", "harm"):
            self.advance()
            harm = True
        self.end_statement()
        return OccurrenceDecl(name.text, kind, label, producer, harm, keyword.span)

    def parse_causes(self) -> CausesDecl:
        keyword = self.expect_keyword("causes")
        source = self.expect_id()
        self.expect("ARROW", "'->'")
        target = self.expect_id()
        self.end_statement()
        return CausesDecl(source.text, target.text, keyword.span)

    def parse_attribution(self, mode: Mode) -> AttributionDecl:
        keyword = self.advance()  # attribute | claim
        sense = self.parse_sense()
        subject = self.expect_id()
        self.expect_keyword("for")
        occurrence = self.expect_id()
        self.end_statement()
        return AttributionDecl(sense, subject.text, occurrence.text, mode, keyword.span)

    def parse_fact(self) -> FactDecl:
        keyword = self.expect_keyword("fact")
        condition = self.expect_id("a condition name")
        if condition.text not in CONDITION_NAMES:
            raise ParseError(
                "E_SYN",
                f"unknown condition {condition.text!r}; the condition set is: "
                + ", ".join(sorted(CONDITION_NAMES)),
                condition.span,
            )
        self.expect("LPAREN", "'('")
        subject = self.expect_id()
        self.expect("COMMA", "','")
        occurrence = self.expect_id()
        self.expect("RPAREN", "')'")
        self.expect("EQ", "'='")
        value_token = self.expect_id("met, unmet or unknown")
        try:
            value = Value[value_token.text.upper()]
        except KeyError:
            raise ParseError(
                "E_SYN",
                f"unknown value {value_token.text!r}; expected met, unmet or unknown",
                value_token.span,
            )
        self.end_statement()
        return FactDecl(condition.text, subject.text, occurrence.text, value, keyword.span)

    def parse_note(self) -> NoteDecl:
        keyword = self.expect_keyword("note")
        name = self.expect_id()
        text = self.expect("STRING", "a string")
        self.end_statement()
        return NoteDecl(name.text, text.text, keyword.span)

    def parse_model(self) -> tuple[ModelDecl, list[Diagnostic]]:
        keyword = self.expect_keyword("model")
        self.expect("LBRACE", "'{'")
        exogenous: list[str] = []
        equations: list[tuple[str, Expr]] = []
        context: list[tuple[str, bool]] = []
        bindings: list[tuple[str, str]] = []
        diagnostics: list[Diagnostic] = []
        while True:
            self.skip_newlines()
            if self.at("RBRACE"):
                self.advance()
                break
            if self.at("EOF"):
                diagnostics.append(
                    Diagnostic(
                        Severity.ERROR,
                        "E_SYN",
                        "unterminated model block",
                        (),
                        self.peek().span,
                    )
                )
                break
            try:
                self._parse_model_statement(exogenous, equations, context, bindings)
            except ParseError as error:
                diagnostics.append(
                    Diagnostic(Severity.ERROR, error.code, error.message, (), error.span)
                )
                while not self.at("NEWLINE") and not self.at("RBRACE") and not self.at("EOF"):
                    self.advance()
        decl = ModelDecl(
            tuple(exogenous), tuple(equations), tuple(context), tuple(bindings), keyword.span
        )
        return decl, diagnostics

    def _parse_model_statement(self, exogenous, equations, context, bindings) -> None:
        token = self.expect_id("exogenous, equation, context or bind")
        if token.text == "exogenous":
            exogenous.append(self.expect_id("a variable name").text)
            while self.at("COMMA"):
                self.advance()
                exogenous.append(self.expect_id("a variable name").text)
        elif token.text == "equation":
            name = self.expect_id("a variable name")
            self.expect("EQ", "'='")
            equations.append((name.text, self.parse_expr()))
        elif token.text == "context":
            name = self.expect_id("a variable name")
            self.expect("EQ", "'='")
            context.append((name.text, self.parse_bool()))
            while self.at("COMMA"):
                self.advance()
                name = self.expect_id("a variable name")
                self.expect("EQ", "'='")
                context.append((name.text, self.parse_bool()))
        elif token.text == "bind":
            variable = self.expect_id("a variable name")
            self.expect("ARROW", "'->'")
            occurrence = self.expect_id("an occurrence id")
            bindings.append((variable.text, occurrence.text))
        else:
            raise ParseError(
                "E_SYN",
                f"unknown model statement {token.text!r}; expected exogenous, "
                "equation, context or bind",
                token.span,
            )
        token = self.peek()
        if token.type not in ("NEWLINE", "RBRACE", "EOF"):
            raise ParseError(
                "E_SYN", f"unexpected {token.text!r} after model statement", token.span
            )
        if token.type == "NEWLINE":
            self.advance()


_STATEMENT_KEYWORDS = (
    "actor",
    "occurrence",
    "causes",
    "model",
    "attribute",
    "claim",
    "fact",
    "note",
)


def parse(source: str, file: str = "<string>") -> tuple[list[Declaration], list[Diagnostic]]:
    """Parse a .resp source into declarations plus diagnostics.

    Lexical and syntactic errors are collected with recovery at statement
    boundaries; declarations that parsed cleanly are still returned.
    """
    tokens, diagnostics = tokenize(source, file)
    parser = _Parser(tokens)
    declarations: list[Declaration] = []
    while True:
        parser.skip_newlines()
        if parser.at("EOF"):
            break
        token = parser.peek()
        try:
            if token.type != "ID" or token.text not in _STATEMENT_KEYWORDS:
                raise ParseError(
                    "E_SYN",
                    f"expected a statement keyword ({', '.join(_STATEMENT_KEYWORDS)}), "
                    f"found {token.text!r}",
                    token.span,
                )
            if token.text == "actor":
                declarations.append(parser.parse_actor())
            elif token.text == "occurrence":
                declarations.append(parser.parse_occurrence())
            elif token.text == "causes":
                declarations.append(parser.parse_causes())
            elif token.text == "model":
                decl, model_diags = parser.parse_model()
                diagnostics.extend(model_diags)
                declarations.append(decl)
            elif token.text == "attribute":
                declarations.append(parser.parse_attribution(Mode.ASSERTED))
            elif token.text == "claim":
                declarations.append(parser.parse_attribution(Mode.CLAIMED))
            elif token.text == "fact":
                declarations.append(parser.parse_fact())
            else:
                declarations.append(parser.parse_note())
        except ParseError as error:
            diagnostics.append(
                Diagnostic(Severity.ERROR, error.code, error.message, (), error.span)
            )
            parser.sync_to_statement()
    return declarations, diagnostics


def parse_sense_text(text: str) -> Sense:
    """Parse a sense written as on the command line, e.g. moral(attributability)."""
    tokens, diagnostics = tokenize(text)
    if diagnostics:
        raise ValueError(diagnostics[0].message)
    parser = _Parser(tokens)
    try:
        sense = parser.parse_sense()
    except ParseError as error:
        raise ValueError(error.message) from None
    if not parser.at("EOF"):
        raise ValueError(f"trailing input after sense: {parser.peek().text!r}")
    return sense


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def _quote(text: str) -> str:
    return '"' + "".join(_UNESCAPES.get(ch, ch) for ch in text) + '"'


def _bool_text(value: bool) -> str:
    return "true" if value else "false"


def serialize(scenario: Scenario) -> str:
    """Canonical textual form; parse(serialize(s)) rebuilds an equal scenario."""
    if scenario.is_empty:
        return ""
    groups: list[list[str]] = []

    lines = []
    for actor in scenario.actors:
        line = f"actor {actor.id} kind {actor.kind}"
        if actor.label:
            line += f" {_quote(actor.label)}"
        lines.append(line)
    groups.append(lines)

    lines = []
    for occ in scenario.occurrences:
        line = f"occurrence {occ.id} kind {occ.kind}"
        if occ.producer:
            line += f" by {occ.producer}"
        if occ.label:
            line += f" {_quote(occ.label)}"
        if occ.harm:
            line += " harm"
        lines.append(line)
    groups.append(lines)

    if scenario.model is not None:
        model = scenario.model
        lines = ["model {"]
        if model.exogenous:
            lines.append("  exogenous " + ", ".join(model.exogenous))
        if model.context:
            lines.append(
                "  context "
                + ", ".join(f"{name} = {_bool_text(value)}" for name, value in model.context)
            )
        for name, expr in model.equations:
            lines.append(f"  equation {name} = {expr.text()}")
        for variable, occurrence in model.bindings:
            lines.append(f"  bind {variable} -> {occurrence}")
        lines.append("}")
        groups.append(lines)

    groups.append([f"causes {e.source} -> {e.target}" for e in scenario.edges])

    for mode in (Mode.ASSERTED, Mode.CLAIMED):
        keyword = "attribute" if mode is Mode.ASSERTED else "claim"
        groups.append(
            [
                f"{keyword} {a.sense.text} {a.subject} for {a.occurrence}"
                for a in scenario.attributions
                if a.mode is mode
            ]
        )

    groups.append(
        [
            f"fact {f.condition}({f.subject}, {f.occurrence}) = {f.value}"
            for f in scenario.facts
        ]
    )
    groups.append([f"note {n.id} {_quote(n.text)}" for n in scenario.notes])

    chunks = [HEADER]
    for group in groups:
        if group:
            chunks.append("\n".join(group))
    return "\n\n".join(chunks) + "\n"
