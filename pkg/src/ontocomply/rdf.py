"""Triple/graph model plus an N-Triples and Turtle-subset reader/writer.

The Turtle dialect understood here is deliberately small: ``@prefix``,
prefixed names, absolute IRIs, the ``a`` keyword, string literals with an
optional language tag or ``^^datatype``, the ``.``/``;``/``,`` terminators,
labelled blank nodes and ``#`` comments.  No collections, no ``[ ... ]``
property lists, no triple-quoted literals.
"""

from __future__ import annotations

import itertools
import re
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

RDF = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS = "http://www.w3.org/2000/01/rdf-schema#"
OWL = "http://www.w3.org/2002/07/owl#"
XSD = "http://www.w3.org/2001/XMLSchema#"

VOCAB_NAMESPACES = (RDF, RDFS, OWL, XSD)

_ABS_IRI = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:[^\s<>\"{}|\\^`]*$")
_BLANK_LABEL = re.compile(r"^[A-Za-z0-9_][A-Za-z0-9_\-.]*$")


class RDFSyntaxError(ValueError):
    """Raised for malformed input; carries a 1-based line/column."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)


@dataclass(frozen=True, order=True)
class Term:
    kind: str  # "iri" | "literal" | "blank"
    value: str
    datatype: str | None = None
    lang: str | None = None

    def __post_init__(self):
        if self.kind == "iri":
            if not self.value or not _ABS_IRI.match(self.value):
                raise ValueError(f"not an absolute IRI: {self.value!r}")
        elif self.kind == "blank":
            if not _BLANK_LABEL.match(self.value):
                raise ValueError(f"bad blank node label: {self.value!r}")
        elif self.kind != "literal":
            raise ValueError(f"unknown term kind {self.kind!r}")

    @property
    def is_iri(self) -> bool:
        return self.kind == "iri"

    @property
    def is_blank(self) -> bool:
        return self.kind == "blank"

    @property
    def is_literal(self) -> bool:
        return self.kind == "literal"

    def n3(self) -> str:
        if self.kind == "iri":
            return f"<{self.value}>"
        if self.kind == "blank":
            return f"_:{self.value}"
        out = '"' + _escape(self.value) + '"'
        if self.lang:
            out += "@" + self.lang
        elif self.datatype:
            out += f"^^<{self.datatype}>"
        return out

    def __str__(self) -> str:
        return self.value if self.kind == "iri" else self.n3()


def IRI(value: str) -> Term:
    return Term("iri", value)


def Literal(value: str, datatype: str | None = None, lang: str | None = None) -> Term:
    return Term("literal", value, datatype, lang)


def BNode(label: str) -> Term:
    return Term("blank", label)


RDF_TYPE = IRI(RDF + "type")
RDFS_SUBCLASSOF = IRI(RDFS + "subClassOf")
RDFS_SUBPROPERTYOF = IRI(RDFS + "subPropertyOf")
RDFS_DOMAIN = IRI(RDFS + "domain")
RDFS_RANGE = IRI(RDFS + "range")
RDFS_LABEL = IRI(RDFS + "label")


def is_vocabulary(term: Term) -> bool:
    """True for IRIs in the rdf/rdfs/owl/xsd namespaces."""
    return term.kind == "iri" and term.value.startswith(VOCAB_NAMESPACES)


def local_name(iri: str) -> str:
    cut = max(iri.rfind("#"), iri.rfind("/"))
    if cut < 0:
        cut = iri.find(":")
    return iri[cut + 1:]


def namespace(iri: str) -> str:
    return iri[: len(iri) - len(local_name(iri))]


@dataclass(frozen=True)
class Triple:
    subject: Term
    predicate: Term
    object: Term

    def __post_init__(self):
        if not self.predicate.is_iri:
            raise ValueError("predicate must be an IRI")
        if self.subject.is_literal:
            raise ValueError("subject cannot be a literal")

    def __iter__(self):
        return iter((self.subject, self.predicate, self.object))

    def n3(self) -> str:
        return f"{self.subject.n3()} {self.predicate.n3()} {self.object.n3()} ."


class Graph:
    """Immutable set of triples with a prefix map and a role tag.

    Every transformation in the package builds a new Graph; indexes are
    computed once at construction.
    """

    __slots__ = ("_triples", "_prefixes", "role", "_out", "_in", "_by_pred")

    def __init__(
        self,
        triples: Iterable[Triple] = (),
        prefixes: Mapping[str, str] | None = None,
        role: str = "kg",
    ):
        if role not in ("kg", "ontology"):
            raise ValueError(f"role must be 'kg' or 'ontology', not {role!r}")
        self._triples = frozenset(triples)
        self._prefixes = dict(prefixes or {})
        self.role = role
        out: dict[Term, set] = defaultdict(set)
        inc: dict[Term, set] = defaultdict(set)
        by_pred: dict[Term, set] = defaultdict(set)
        for t in self._triples:
            out[t.subject].add((t.predicate, t.object))
            inc[t.object].add((t.predicate, t.subject))
            by_pred[t.predicate].add((t.subject, t.object))
        self._out = {k: frozenset(v) for k, v in out.items()}
        self._in = {k: frozenset(v) for k, v in inc.items()}
        self._by_pred = {k: frozenset(v) for k, v in by_pred.items()}

    @property
    def triples(self) -> frozenset[Triple]:
        return self._triples

    @property
    def prefixes(self) -> dict[str, str]:
        return dict(self._prefixes)

    def __len__(self) -> int:
        return len(self._triples)

    def __iter__(self) -> Iterator[Triple]:
        return iter(sorted(self._triples, key=_triple_key))

    def __contains__(self, triple) -> bool:
        return triple in self._triples

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._triples == other._triples

    def __hash__(self):
        return hash(self._triples)

    def __repr__(self) -> str:
        return f"<Graph role={self.role} triples={len(self)}>"

    def with_role(self, role: str) -> "Graph":
        return Graph(self._triples, self._prefixes, role)

    def union(self, *others: "Graph", role: str | None = None) -> "Graph":
        triples = set(self._triples)
        prefixes = dict(self._prefixes)
        for g in others:
            triples |= g._triples
            for k, v in g._prefixes.items():
                prefixes.setdefault(k, v)
        return Graph(triples, prefixes, role or self.role)

    def nodes(self) -> set[Term]:
        return set(self._out) | set(self._in)

    def predicates(self) -> set[Term]:
        return set(self._by_pred)

    def subjects(self, predicate: Term, obj: Term) -> set[Term]:
        return {s for p, s in self._in.get(obj, ()) if p == predicate}

    def objects(self, subject: Term, predicate: Term) -> set[Term]:
        return {o for p, o in self._out.get(subject, ()) if p == predicate}

    def pairs(self, predicate: Term) -> frozenset:
        return self._by_pred.get(predicate, frozenset())

    def neighbors(self, node: Term, direction: str = "both") -> set:
        """Edges incident to ``node`` as (predicate, other-end) pairs."""
        if direction == "out":
            return set(self._out.get(node, ()))
        if direction == "in":
            return set(self._in.get(node, ()))
        if direction == "both":
            return set(self._out.get(node, ())) | set(self._in.get(node, ()))
        raise ValueError(f"direction must be out/in/both, not {direction!r}")

    def compress(self, iri: str) -> str:
        best = None
        for prefix, ns in self._prefixes.items():
            if iri.startswith(ns) and (best is None or len(ns) > len(best[1])):
                best = (prefix, ns)
        if best is None:
            return iri
        return f"{best[0]}:{iri[len(best[1]):]}"

    def expand(self, name: str) -> str:
        prefix, _, rest = name.partition(":")
        if prefix in self._prefixes:
            return self._prefixes[prefix] + rest
        return name


def _triple_key(t: Triple):
    return (t.subject.n3(), t.predicate.n3(), t.object.n3())


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<iri><[^<>"{}|^`\\\s]*>)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<lang>@[A-Za-z]+(?:-[A-Za-z0-9]+)*)
  | (?P<dtsep>\^\^)
  | (?P<blank>_:[A-Za-z0-9_](?:[A-Za-z0-9_\-.]*[A-Za-z0-9_\-])?)
  | (?P<pname>(?:[A-Za-z][A-Za-z0-9_\-]*)?:(?:[A-Za-z0-9_](?:[A-Za-z0-9_\-.]*[A-Za-z0-9_\-])?)?)
  | (?P<kw_a>a(?=[\s<"_]))
  | (?P<punct>[.;,\[\]])
    """,
    re.VERBOSE,
)
_DIRECTIVE = re.compile(r"@prefix\b|@base\b|PREFIX\b|BASE\b")

_ESCAPES = {"t": "\t", "n": "\n", "r": "\r", '"': '"', "'": "'", "\\": "\\", "b": "\b", "f": "\f"}


def _unescape(body: str, line: int, col: int) -> str:
    out = []
    i = 0
    while i < len(body):
        c = body[i]
        if c != "\\":
            out.append(c)
            i += 1
            continue
        nxt = body[i + 1]
        if nxt in _ESCAPES:
            out.append(_ESCAPES[nxt])
            i += 2
        elif nxt in "uU":
            width = 4 if nxt == "u" else 8
            hexpart = body[i + 2: i + 2 + width]
            if len(hexpart) != width or not all(h in "0123456789abcdefABCDEF" for h in hexpart):
                raise RDFSyntaxError("bad unicode escape", line, col)
            out.append(chr(int(hexpart, 16)))
            i += 2 + width
        else:
            raise RDFSyntaxError(f"unknown escape \\{nxt}", line, col)
    return "".join(out)


def _escape(value: str) -> str:
    return (
        value.replace("\\", "\\\\")
        .replace('"', '\\"')
        .replace("\n", "\\n")
        .replace("\r", "\\r")
        .replace("\t", "\\t")
    )


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos = 0
    line, line_start = 1, 0
    n = len(text)
    while pos < n:
        col = pos - line_start + 1
        m = _DIRECTIVE.match(text, pos)
        if m:
            toks.append(_Tok("directive", m.group(0), line, col))
            pos = m.end()
            continue
        m = _TOKEN.match(text, pos)
        if not m:
            raise RDFSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            toks.append(_Tok(kind, m.group(0), line, col))
        pos = m.end()
    return toks


class _Parser:
    def __init__(self, text: str, fmt: str):
        self.fmt = fmt
        self.toks = _tokenize(text)
        self.i = 0
        self.prefixes: dict[str, str] = {}
        self.triples: list[Triple] = []
        self._taken = {t.text[2:] for t in self.toks if t.kind == "blank"}
        self._anon = 0

    def fresh(self) -> Term:
        while f"genid{self._anon}" in self._taken:
            self._anon += 1
        self._anon += 1
        return BNode(f"genid{self._anon - 1}")

    def anon(self, open_tok: _Tok) -> Term:
        """``[ ... ]`` after its opening bracket has been consumed."""
        if self.fmt != "turtle":
            raise RDFSyntaxError("anonymous blank nodes are not allowed in N-Triples", open_tok.line, open_tok.col)
        node = self.fresh()
        nxt = self.peek()
        if nxt is not None and nxt.kind == "punct" and nxt.text == "]":
            self.take()
            return node
        self.predicate_objects(node, "]")
        return node

    def peek(self) -> _Tok | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self) -> _Tok:
        tok = self.peek()
        if tok is None:
            last = self.toks[-1] if self.toks else _Tok("", "", 1, 1)
            raise RDFSyntaxError("unexpected end of input", last.line, last.col + len(last.text))
        self.i += 1
        return tok

    def expect_punct(self, ch: str) -> _Tok:
        tok = self.take()
        if tok.kind != "punct" or tok.text != ch:
            raise RDFSyntaxError(f"expected {ch!r}, found {tok.text!r}", tok.line, tok.col)
        return tok

    def parse(self) -> None:
        while self.peek() is not None:
            tok = self.peek()
            if tok.kind == "directive":
                self.directive()
            else:
                self.statement()

    def directive(self) -> None:
        tok = self.take()
        if self.fmt != "turtle":
            raise RDFSyntaxError("directives are not allowed in N-Triples", tok.line, tok.col)
        if tok.text in ("@base", "BASE"):
            raise RDFSyntaxError("@base is not supported", tok.line, tok.col)
        name = self.take()
        if name.kind != "pname" or not name.text.endswith(":"):
            raise RDFSyntaxError("expected prefix name", name.line, name.col)
        ns = self.take()
        if ns.kind != "iri":
            raise RDFSyntaxError("expected namespace IRI", ns.line, ns.col)
        self.prefixes[name.text[:-1]] = self.iri_value(ns)
        if tok.text == "@prefix":
            self.expect_punct(".")

    def iri_value(self, tok: _Tok) -> str:
        value = _unescape(tok.text[1:-1], tok.line, tok.col)
        if not _ABS_IRI.match(value):
            raise RDFSyntaxError(f"IRI is not absolute: {value!r}", tok.line, tok.col)
        return value

    def pname_value(self, tok: _Tok) -> str:
        if self.fmt != "turtle":
            raise RDFSyntaxError("prefixed names are not allowed in N-Triples", tok.line, tok.col)
        prefix, _, local = tok.text.partition(":")
        if prefix not in self.prefixes:
            raise RDFSyntaxError(f"unknown prefix {prefix!r}", tok.line, tok.col)
        value = self.prefixes[prefix] + local
        if not _ABS_IRI.match(value):
            raise RDFSyntaxError(f"IRI is not absolute: {value!r}", tok.line, tok.col)
        return value

    def subject(self) -> Term:
        tok = self.take()
        if tok.kind == "iri":
            return IRI(self.iri_value(tok))
        if tok.kind == "pname":
            return IRI(self.pname_value(tok))
        if tok.kind == "blank":
            return BNode(tok.text[2:])
        if tok.kind == "punct" and tok.text == "[":
            return self.anon(tok)
        raise RDFSyntaxError(f"bad subject {tok.text!r}", tok.line, tok.col)

    def predicate(self) -> Term:
        tok = self.take()
        if tok.kind == "iri":
            return IRI(self.iri_value(tok))
        if tok.kind == "pname":
            return IRI(self.pname_value(tok))
        if tok.kind == "kw_a" and self.fmt == "turtle":
            return RDF_TYPE
        raise RDFSyntaxError(f"bad predicate {tok.text!r}", tok.line, tok.col)

    def object(self) -> Term:
        tok = self.take()
        if tok.kind == "iri":
            return IRI(self.iri_value(tok))
        if tok.kind == "pname":
            return IRI(self.pname_value(tok))
        if tok.kind == "blank":
            return BNode(tok.text[2:])
        if tok.kind == "punct" and tok.text == "[":
            return self.anon(tok)
        if tok.kind == "string":
            lexical = _unescape(tok.text[1:-1], tok.line, tok.col)
            nxt = self.peek()
            if nxt is not None and nxt.kind == "lang":
                self.take()
                return Literal(lexical, lang=nxt.text[1:])
            if nxt is not None and nxt.kind == "dtsep":
                self.take()
                dt = self.take()
                if dt.kind == "iri":
                    return Literal(lexical, datatype=self.iri_value(dt))
                if dt.kind == "pname":
                    return Literal(lexical, datatype=self.pname_value(dt))
                raise RDFSyntaxError("expected datatype IRI", dt.line, dt.col)
            return Literal(lexical)
        raise RDFSyntaxError(f"bad object {tok.text!r}", tok.line, tok.col)

    def statement(self) -> None:
        bracketed = self.peek().text == "["
        subj = self.subject()
        if bracketed:
            nxt = self.peek()
            if nxt is not None and nxt.kind == "punct" and nxt.text == ".":
                self.take()
                return
        self.predicate_objects(subj, ".")

    def predicate_objects(self, subj: Term, end: str) -> None:
        while True:
            pred = self.predicate()
            while True:
                self.triples.append(Triple(subj, pred, self.object()))
                tok = self.take()
                if tok.kind != "punct":
                    raise RDFSyntaxError(f"expected terminator, found {tok.text!r}", tok.line, tok.col)
                if tok.text == "," and self.fmt == "turtle":
                    continue
                break
            if tok.text == ";" and self.fmt == "turtle":
                nxt = self.peek()
                if nxt is not None and nxt.kind == "punct" and nxt.text == end:
                    self.take()
                    return
                continue
            if tok.text == end:
                return
            raise RDFSyntaxError(f"unexpected {tok.text!r}", tok.line, tok.col)


def parse(text: str, format: str = "turtle", role: str = "kg") -> Graph:
    """Parse N-Triples (``"ntriples"``) or the Turtle subset (``"turtle"``)."""
    if format in ("nt", "ntriples"):
        fmt = "ntriples"
    elif format in ("ttl", "turtle", "turtle-subset"):
        fmt = "turtle"
    else:
        raise ValueError(f"unsupported format {format!r}")
    parser = _Parser(text, fmt)
    parser.parse()
    return Graph(parser.triples, parser.prefixes, role)


def guess_format(path: str) -> str:
    return "ntriples" if str(path).endswith(".nt") else "turtle"


def load(path, role: str = "kg", format: str | None = None) -> Graph:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse(text, format or guess_format(str(path)), role)


def serialize(g: Graph, format: str = "ntriples") -> str:
    """Canonical N-Triples: one statement per line, lines sorted."""
    if format not in ("nt", "ntriples"):
        raise ValueError(f"unsupported format {format!r}")
    lines = sorted(t.n3() for t in g.triples)
    return "".join(line + "\n" for line in lines)


def isomorphic(a: Graph, b: Graph) -> bool:
    """Triple-set equality up to a bijective relabelling of blank nodes."""
    if len(a) != len(b):
        return False
    a_blanks = {t for tr in a.triples for t in (tr.subject, tr.object) if t.is_blank}
    b_blanks = {t for tr in b.triples for t in (tr.subject, tr.object) if t.is_blank}
    if len(a_blanks) != len(b_blanks):
        return False
    if not a_blanks:
        return a.triples == b.triples
    ca, cb = _colour(a, a_blanks), _colour(b, b_blanks)
    if sorted(ca.values()) != sorted(cb.values()):
        return False
    by_colour: dict = defaultdict(list)
    for node, colour in cb.items():
        by_colour[colour].append(node)
    order = sorted(a_blanks, key=lambda n: len(by_colour[ca[n]]))
    target = b.triples

    def rename(t: Term, m: dict) -> Term:
        return m.get(t, t)

    def consistent(m: dict) -> bool:
        for tr in a.triples:
            s, o = tr.subject, tr.object
            if (s.is_blank and s not in m) or (o.is_blank and o not in m):
                continue
            if Triple(rename(s, m), tr.predicate, rename(o, m)) not in target:
                return False
        return True

    def search(idx: int, m: dict, used: set) -> bool:
        if idx == len(order):
            return True
        node = order[idx]
        for cand in by_colour[ca[node]]:
            if cand in used:
                continue
            m[node] = cand
            used.add(cand)
            if consistent(m) and search(idx + 1, m, used):
                return True
            del m[node]
            used.discard(cand)
        return False

    return search(0, {}, set())


def _colour(g: Graph, blanks: set) -> dict:
    colour = {n: "" for n in blanks}
    for _ in range(len(blanks) + 1):
        new = {}
        for n in blanks:
            sig = []
            for p, o in g.neighbors(n, "out"):
                sig.append(("o", p.value, colour[o] if o.is_blank else o.n3()))
            for p, s in g.neighbors(n, "in"):
                sig.append(("i", p.value, colour[s] if s.is_blank else s.n3()))
            new[n] = str(hash((colour[n], tuple(sorted(sig)))))
        if len(set(new.values())) == len(set(colour.values())):
            colour = new
            break
        colour = new
    return colour


def fresh_blank_labels(prefix: str = "b") -> Iterator[Term]:
    for i in itertools.count():
        yield BNode(f"{prefix}{i}")
