"""Turtle subset: prefix declarations, the ``a`` keyword, predicate/object lists,
collections, blank nodes, and plain/typed/tagged literals.

Full Turtle is out of scope; this covers what the axiom and ontology files need,
and parse(serialize(G)) is isomorphic to G up to blank-node renaming.
"""

from __future__ import annotations

from dataclasses import dataclass

from stagegraph.errors import TurtleParseError
from stagegraph.kgraph.model import (
    BlankFactory,
    Quad,
    Term,
    blank,
    iri,
    literal,
)
from stagegraph.namespaces import (
    PREFIXES,
    RDF_FIRST,
    RDF_NIL,
    RDF_REST,
    RDF_TYPE,
    XSD_BOOLEAN,
    XSD_DECIMAL,
    XSD_INTEGER,
)

DEFAULT_GRAPH = "https://stagegraph.example/graph/default"

_PN_EXTRA = "_-."  # allowed inside local names besides alphanumerics


@dataclass(frozen=True, slots=True)
class _Token:
    kind: str
    value: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, line, col = 0, 1, 1
    n = len(text)

    def err(msg: str):
        raise TurtleParseError(msg, line, col)

    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        if ch == "<":
            j = text.find(">", i + 1)
            if j < 0:
                err("unterminated IRI")
            value = text[i + 1 : j]
            tokens.append(_Token("iri", value, start_line, start_col))
            col += j - i + 1
            i = j + 1
            continue
        if ch == '"':
            j = i + 1
            out = []
            while j < n and text[j] != '"':
                c = text[j]
                if c == "\\":
                    if j + 1 >= n:
                        err("dangling escape")
                    esc = text[j + 1]
                    mapping = {"n": "\n", "t": "\t", "r": "\r", '"': '"', "\\": "\\"}
                    if esc in mapping:
                        out.append(mapping[esc])
                        j += 2
                        continue
                    if esc == "u" and j + 5 < n:
                        out.append(chr(int(text[j + 2 : j + 6], 16)))
                        j += 6
                        continue
                    err(f"unsupported escape \\{esc}")
                if c == "\n":
                    err("newline inside string literal")
                out.append(c)
                j += 1
            if j >= n:
                err("unterminated string literal")
            tokens.append(_Token("string", "".join(out), start_line, start_col))
            col += j - i + 1
            i = j + 1
            continue
        if ch == "^" and text[i : i + 2] == "^^":
            tokens.append(_Token("datatype", "^^", start_line, start_col))
            i += 2
            col += 2
            continue
        if ch == "@":
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] == "-"):
                j += 1
            word = text[i + 1 : j]
            kind = "prefix_decl" if word == "prefix" else "langtag"
            if not word:
                err("empty @ directive")
            tokens.append(_Token(kind, word, start_line, start_col))
            col += j - i
            i = j
            continue
        if ch in ".;,()[]":
            # A '.' may terminate a statement or sit inside a decimal; numbers
            # are handled below, so a bare '.' here is punctuation.
            tokens.append(_Token(ch, ch, start_line, start_col))
            i += 1
            col += 1
            continue
        if ch == "_" and text[i : i + 2] == "_:":
            j = i + 2
            while j < n and (text[j].isalnum() or text[j] in "_-"):
                j += 1
            if j == i + 2:
                err("empty blank node label")
            tokens.append(_Token("blank", text[i + 2 : j], start_line, start_col))
            col += j - i
            i = j
            continue
        if ch.isdigit() or (ch in "+-" and i + 1 < n and text[i + 1].isdigit()):
            j = i + 1
            seen_dot = False
            while j < n and (text[j].isdigit() or (text[j] == "." and not seen_dot)):
                if text[j] == ".":
                    # trailing '.' is statement punctuation, not part of the number
                    if j + 1 >= n or not text[j + 1].isdigit():
                        break
                    seen_dot = True
                j += 1
            word = text[i:j]
            tokens.append(_Token("number", word, start_line, start_col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == ":":
            j = i
            while j < n and (text[j].isalnum() or text[j] in _PN_EXTRA or text[j] == ":"):
                j += 1
            word = text[i:j]
            while word.endswith("."):
                # trailing dots belong to statement termination
                word = word[:-1]
                j -= 1
            if word in ("true", "false"):
                tokens.append(_Token("boolean", word, start_line, start_col))
            elif word == "a":
                tokens.append(_Token("a", word, start_line, start_col))
            elif ":" in word:
                tokens.append(_Token("pname", word, start_line, start_col))
            else:
                err(f"unexpected bareword {word!r}")
            col += j - i
            i = j
            continue
        err(f"unexpected character {ch!r}")
    tokens.append(_Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token], graph: str, blanks: BlankFactory | None):
        self.tokens = tokens
        self.pos = 0
        self.graph = iri(graph)
        self.prefixes: dict[str, str] = {}
        self.labels: dict[str, Term] = {}
        self.blanks = blanks or BlankFactory(prefix="pb")
        self.quads: list[Quad] = []

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def take(self, kind: str | None = None) -> _Token:
        tok = self.tokens[self.pos]
        if kind is not None and tok.kind != kind:
            raise TurtleParseError(
                f"expected {kind}, found {tok.kind} {tok.value!r}", tok.line, tok.column
            )
        self.pos += 1
        return tok

    def err(self, msg: str):
        tok = self.peek()
        raise TurtleParseError(msg, tok.line, tok.column)

    def emit(self, s: Term, p: Term, o: Term):
        self.quads.append(Quad(s, p, o, self.graph))

    def parse(self) -> list[Quad]:
        while self.peek().kind != "eof":
            if self.peek().kind == "prefix_decl":
                self.take()
                name_tok = self.take("pname")
                if not name_tok.value.endswith(":"):
                    self.err("prefix declaration needs a trailing colon")
                target = self.take("iri")
                self.take(".")
                self.prefixes[name_tok.value[:-1]] = target.value
                continue
            self.statement()
        return self.quads

    def resolve(self, pname: str, tok: _Token) -> Term:
        prefix, _, local = pname.partition(":")
        base = self.prefixes.get(prefix, PREFIXES.get(prefix))
        if base is None:
            raise TurtleParseError(f"unknown prefix {prefix!r}", tok.line, tok.column)
        return iri(base + local)

    def label_blank(self, name: str) -> Term:
        if name not in self.labels:
            self.labels[name] = self.blanks.fresh()
        return self.labels[name]

    def statement(self):
        subject = self.node(allow_literal=False)
        if self.peek().kind == ".":
            # A lone blank-node property list is a legal statement on its own.
            self.take(".")
            return
        self.predicate_object_list(subject)
        self.take(".")

    def predicate_object_list(self, subject: Term):
        while True:
            predicate = self.predicate()
            while True:
                obj = self.node(allow_literal=True)
                self.emit(subject, predicate, obj)
                if self.peek().kind == ",":
                    self.take()
                    continue
                break
            if self.peek().kind == ";":
                self.take()
                if self.peek().kind in {".", "]", ";"}:
                    # tolerate trailing semicolon
                    while self.peek().kind == ";":
                        self.take()
                    return
                continue
            return

    def predicate(self) -> Term:
        tok = self.peek()
        if tok.kind == "a":
            self.take()
            return iri(RDF_TYPE)
        if tok.kind == "iri":
            return iri(self.take().value)
        if tok.kind == "pname":
            return self.resolve(self.take().value, tok)
        self.err(f"expected predicate, found {tok.kind}")

    def node(self, allow_literal: bool) -> Term:
        tok = self.peek()
        if tok.kind == "iri":
            return iri(self.take().value)
        if tok.kind == "pname":
            return self.resolve(self.take().value, tok)
        if tok.kind == "blank":
            self.take()
            return self.label_blank(tok.value)
        if tok.kind == "[":
            self.take()
            node = self.blanks.fresh()
            if self.peek().kind != "]":
                self.predicate_object_list(node)
            self.take("]")
            return node
        if tok.kind == "(":
            self.take()
            items = []
            while self.peek().kind != ")":
                items.append(self.node(allow_literal=True))
            self.take(")")
            return self.collection(items)
        if not allow_literal:
            self.err(f"expected subject node, found {tok.kind}")
        if tok.kind == "string":
            self.take()
            if self.peek().kind == "datatype":
                self.take()
                dt_tok = self.peek()
                dt = self.node(allow_literal=False)
                if not dt.is_iri:
                    raise TurtleParseError("datatype must be an IRI", dt_tok.line, dt_tok.column)
                return literal(tok.value, datatype=dt.value)
            if self.peek().kind == "langtag":
                lang = self.take()
                return literal(tok.value, language=lang.value)
            return literal(tok.value)
        if tok.kind == "number":
            self.take()
            dt = XSD_DECIMAL if "." in tok.value else XSD_INTEGER
            return literal(tok.value, datatype=dt)
        if tok.kind == "boolean":
            self.take()
            return literal(tok.value, datatype=XSD_BOOLEAN)
        self.err(f"expected node, found {tok.kind}")

    def collection(self, items: list[Term]) -> Term:
        if not items:
            return iri(RDF_NIL)
        head = self.blanks.fresh()
        node = head
        first = iri(RDF_FIRST)
        rest = iri(RDF_REST)
        for index, item in enumerate(items):
            self.emit(node, first, item)
            if index == len(items) - 1:
                self.emit(node, rest, iri(RDF_NIL))
            else:
                nxt = self.blanks.fresh()
                self.emit(node, rest, nxt)
                node = nxt
        return head


def parse_turtle(
    text: str,
    graph: str = DEFAULT_GRAPH,
    blanks: BlankFactory | None = None,
) -> list[Quad]:
    """Parse Turtle-subset text into quads within one named graph.

    Blank-node labels are scoped to this parse and renamed to fresh identifiers.
    """
    return _Parser(_tokenize(text), graph, blanks).parse()


# -- serialization ---------------------------------------------------------


def _escape(value: str) -> str:
    return (
        value.replace("\\", "\\\\")
        .replace('"', '\\"')
        .replace("\n", "\\n")
        .replace("\r", "\\r")
        .replace("\t", "\\t")
    )


def _is_plain_integer(text: str) -> bool:
    body = text[1:] if text[:1] in "+-" else text
    return body.isdigit() and bool(body)


def _is_plain_decimal(text: str) -> bool:
    body = text[1:] if text[:1] in "+-" else text
    if body.count(".") != 1:
        return False
    left, right = body.split(".")
    return left.isdigit() and right.isdigit()


class _Serializer:
    def __init__(self, quads: list[Quad]):
        self.triples = sorted({q.triple() for q in quads}, key=lambda t: tuple(x.sort_key() for x in t))
        self.by_subject: dict[Term, list[tuple[Term, Term]]] = {}
        self.object_refs: dict[Term, int] = {}
        for s, p, o in self.triples:
            self.by_subject.setdefault(s, []).append((p, o))
            if o.is_blank:
                self.object_refs[o] = self.object_refs.get(o, 0) + 1
        self.used_prefixes: set[str] = set()
        self.consumed: set[Term] = set()
        self.list_heads = self._find_lists()

    def _find_lists(self) -> dict[Term, list[Term]]:
        """Blank nodes that are well-formed rdf:first/rdf:rest chains, collapsible to ( ... )."""
        first, rest = iri(RDF_FIRST), iri(RDF_REST)
        nil = iri(RDF_NIL)
        cells: dict[Term, tuple[Term, Term]] = {}
        for s, props in self.by_subject.items():
            if not s.is_blank:
                continue
            preds = sorted(p.value for p, _ in props)
            if preds == sorted([RDF_FIRST, RDF_REST]) and len(props) == 2:
                f = next(o for p, o in props if p == first)
                r = next(o for p, o in props if p == rest)
                cells[s] = (f, r)
        heads = {}
        tails = {r for _, r in cells.values() if r in cells}
        for node in cells:
            if node in tails:
                continue
            # Only collapse when the head is referenced exactly once and every
            # tail cell exactly once; anything else stays in labeled form.
            if self.object_refs.get(node, 0) != 1:
                continue
            items, cursor, ok = [], node, True
            seen = set()
            while True:
                if cursor in seen:
                    ok = False
                    break
                seen.add(cursor)
                f, r = cells[cursor]
                items.append(f)
                if r == nil:
                    break
                if r not in cells or self.object_refs.get(r, 0) != 1:
                    ok = False
                    break
                cursor = r
            if ok:
                heads[node] = items
                self.consumed |= seen
        return heads

    def compact(self, term: Term) -> str:
        if term.is_iri:
            for prefix, base in PREFIXES.items():
                if term.value.startswith(base):
                    local = term.value[len(base):]
                    if local and all(c.isalnum() or c in "_-." for c in local) and not local.startswith("."):
                        self.used_prefixes.add(prefix)
                        return f"{prefix}:{local}"
            return f"<{term.value}>"
        if term.is_blank:
            if term in self.list_heads:
                return "( " + " ".join(self.compact(i) for i in self.list_heads[term]) + " )"
            return f"_:{term.value}"
        if term.datatype == XSD_INTEGER and _is_plain_integer(term.value):
            return term.value
        if term.datatype == XSD_DECIMAL and _is_plain_decimal(term.value):
            return term.value
        if term.datatype == XSD_BOOLEAN and term.value in ("true", "false"):
            return term.value
        base = f'"{_escape(term.value)}"'
        if term.datatype:
            return base + "^^" + self.compact(Term("iri", term.datatype))
        if term.language:
            return base + "@" + term.language
        return base

    def render(self) -> str:
        body: list[str] = []
        rdf_type = iri(RDF_TYPE)
        subjects = sorted(self.by_subject, key=lambda t: (t.kind != "iri", t.sort_key()))
        for subject in subjects:
            if subject in self.consumed:
                continue
            props = sorted(
                self.by_subject[subject],
                key=lambda po: (po[0] != rdf_type, po[0].sort_key(), po[1].sort_key()),
            )
            anonymous = subject.is_blank and self.object_refs.get(subject, 0) == 0
            subj_text = "[]" if anonymous else self.compact(subject)
            grouped: list[str] = []
            index = 0
            while index < len(props):
                p, o = props[index]
                objs = [o]
                while index + 1 < len(props) and props[index + 1][0] == p:
                    index += 1
                    objs.append(props[index][1])
                pred_text = "a" if p == rdf_type else self.compact(p)
                grouped.append(pred_text + " " + ", ".join(self.compact(x) for x in objs))
                index += 1
            body.append(subj_text + " " + ";\n    ".join(grouped) + " .")
        lines = [f"@prefix {prefix}: <{PREFIXES[prefix]}> ." for prefix in sorted(self.used_prefixes)]
        if lines:
            lines.append("")
        lines.extend(body)
        return "\n".join(lines) + ("\n" if lines or body else "")


def serialize_turtle(quads) -> str:
    """Serialize quads (their graph components are ignored) to Turtle-subset text."""
    return _Serializer(list(quads)).render()
