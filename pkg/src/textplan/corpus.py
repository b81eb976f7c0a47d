"""RDF triple sets, reference texts, and their on-disk formats.

Two formats are supported: the WebNLG XML release (read only) and a native
JSON corpus document (read and write).
"""
from __future__ import annotations

import enum
import json
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .errors import MalformedTriple, SchemaError, XmlError

DELIMITER = " | "
CORPUS_VERSION = 1

_UNIT_RE = re.compile(r'^"(?P<value>[^"]*)"\((?P<unit>[^()]*)\)$')
_QUOTED_RE = re.compile(r'^"(?P<value>.*)"$', re.S)
_ISO_DATE_RE = re.compile(r"^\d{4}-\d{2}-\d{2}$")
_REL_TOKEN_RE = re.compile(
    r"[A-Z]+(?=[A-Z][a-z])"  # acronym followed by a capitalised word: ISSNNumber
    r"|[A-Z]?[a-z]+"
    r"|[A-Z]+"
    r"|\d+"
    r"|[^\W\d_]+"  # non-ASCII letters
    r"|[^\w\s]+"
)


class EntityKind(str, enum.Enum):
    PLAIN = "plain"
    QUOTED = "quoted-literal"
    DATE = "date-literal"
    UNIT = "unit-literal"


@dataclass(frozen=True)
class Entity:
    """A graph node. Identity (equality and hashing) is the canonical ``id`` only."""

    id: str
    kind: EntityKind = field(default=EntityKind.PLAIN, compare=False)
    value: str | None = field(default=None, compare=False)
    unit: str | None = field(default=None, compare=False)
    raw: str | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not self.id:
            raise MalformedTriple("entity id is empty")

    @classmethod
    def from_raw(cls, raw: str) -> "Entity":
        text = raw.strip()
        if not text:
            raise MalformedTriple("entity field is empty")
        m = _UNIT_RE.match(text)
        if m:
            if not m["value"]:
                raise MalformedTriple(f"empty unit value in {raw!r}")
            return cls(text, EntityKind.UNIT, m["value"], m["unit"], raw=text)
        m = _QUOTED_RE.match(text)
        if m:
            inner = m["value"].strip()
            if not inner:
                raise MalformedTriple(f"empty quoted literal {raw!r}")
            kind = EntityKind.DATE if _ISO_DATE_RE.match(inner) else EntityKind.QUOTED
            return cls(inner, kind, raw=text)
        kind = EntityKind.DATE if _ISO_DATE_RE.match(text) else EntityKind.PLAIN
        return cls(text, kind, raw=text)

    @property
    def raw_form(self) -> str:
        return self.raw if self.raw is not None else self.id

    @property
    def token(self) -> str:
        """Single whitespace-free token used in linearized plans."""
        return re.sub(r"\s+", "_", self.id)

    @property
    def surface(self) -> str:
        """Plain surface form: underscores become spaces."""
        return self.id.replace("_", " ")


def relation_tokens(rel_id: str) -> tuple[str, ...]:
    """Split a relation label on underscores, spaces and CamelCase, lowercased.

    >>> relation_tokens("ISSN_number")
    ('issn', 'number')
    >>> relation_tokens("almaMater")
    ('alma', 'mater')
    """
    toks = [t.lower() for t in _REL_TOKEN_RE.findall(rel_id)]
    return tuple(toks) if toks else (rel_id.lower(),)


@dataclass(frozen=True)
class RelationType:
    id: str
    tokens: tuple[str, ...] = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        if not self.id:
            raise MalformedTriple("relation is empty")
        object.__setattr__(self, "tokens", relation_tokens(self.id))


@dataclass(frozen=True)
class Triple:
    subject: Entity
    relation: RelationType
    object: Entity

    def __post_init__(self):
        if self.subject == self.object:
            raise MalformedTriple(f"subject and object are both {self.subject.id!r}")

    @classmethod
    def of(cls, s: str, r: str, o: str) -> "Triple":
        """Build from raw corpus strings."""
        return cls(Entity.from_raw(s), RelationType(r.strip()), Entity.from_raw(o))

    def __str__(self):
        return DELIMITER.join((self.subject.raw_form, self.relation.id, self.object.raw_form))


def parse_triple_line(line: str) -> Triple:
    parts = line.strip("\r\n").split(DELIMITER)
    if len(parts) != 3:
        raise MalformedTriple(f"expected 3 fields separated by {DELIMITER!r}, got {len(parts)}: {line!r}")
    s, r, o = (p.strip() for p in parts)
    if not (s and r and o):
        raise MalformedTriple(f"empty field in {line!r}")
    return Triple.of(s, r, o)


@dataclass(frozen=True)
class InputGraph:
    triples: tuple[Triple, ...]
    entities: tuple[Entity, ...] = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        triples = tuple(self.triples)
        object.__setattr__(self, "triples", triples)
        if len(set(triples)) != len(triples):
            raise MalformedTriple("duplicate triple in input graph")
        seen: dict[Entity, None] = {}
        for t in triples:
            seen.setdefault(t.subject)
            seen.setdefault(t.object)
        object.__setattr__(self, "entities", tuple(seen))

    @classmethod
    def from_lines(cls, lines: Iterable[str]) -> "InputGraph":
        return cls(tuple(parse_triple_line(ln) for ln in lines if ln.strip()))

    def __len__(self):
        return len(self.triples)

    @property
    def pair_unique(self) -> bool:
        pairs = [frozenset((t.subject, t.object)) for t in self.triples]
        return len(set(pairs)) == len(pairs)

    @property
    def relations(self) -> tuple[RelationType, ...]:
        return tuple(dict.fromkeys(t.relation for t in self.triples))


@dataclass(frozen=True)
class DatasetEntry:
    graph: InputGraph
    references: tuple[str, ...] = ()
    category: str = ""
    eid: str = ""


def iter_pairs(entries: Iterable[DatasetEntry]) -> Iterator[tuple[DatasetEntry, str]]:
    """Flatten entries into (entry, reference) pairs; duplicates are kept."""
    for e in entries:
        for ref in e.references:
            yield e, ref


# -- WebNLG XML -------------------------------------------------------------

def _lex_text(lex: ET.Element) -> str:
    # WebNLG 2.x/3.x nest the text in <text>; the 2017 release stores it directly
    inner = lex.find("text")
    node = inner if inner is not None else lex
    return " ".join((node.text or "").split())


def parse_webnlg_xml(data: bytes) -> list[DatasetEntry]:
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        raise XmlError(str(exc)) from exc
    out = []
    for entry in root.iter("entry"):
        eid = entry.get("eid", "")
        tripleset = entry.find("modifiedtripleset")
        if tripleset is None:
            raise XmlError(f"entry {eid}: missing modifiedtripleset")
        triples: dict[Triple, None] = {}
        try:
            for mt in tripleset.iter("mtriple"):
                triples.setdefault(parse_triple_line(mt.text or ""))
            graph = InputGraph(tuple(triples))
        except MalformedTriple as exc:
            raise MalformedTriple(f"entry {eid}: {exc}") from exc
        refs = tuple(t for t in (_lex_text(lx) for lx in entry.findall("lex")) if t)
        out.append(DatasetEntry(graph, refs, entry.get("category", ""), eid))
    return out


def load_webnlg(path: str | Path) -> list[DatasetEntry]:
    """Read one XML file, or every ``*.xml`` below a directory in sorted path order."""
    path = Path(path)
    files = sorted(path.rglob("*.xml")) if path.is_dir() else [path]
    entries = []
    for f in files:
        try:
            entries.extend(parse_webnlg_xml(f.read_bytes()))
        except XmlError as exc:
            raise XmlError(f"{f}: {exc}") from exc
    return entries


# -- native JSON --------------------------------------------------------------

def entry_to_json(e: DatasetEntry) -> dict:
    return {
        "eid": e.eid,
        "category": e.category,
        "triples": [
            {"s": t.subject.raw_form, "r": t.relation.id, "o": t.object.raw_form}
            for t in e.graph.triples
        ],
        "references": list(e.references),
    }


def entry_from_json(obj: dict) -> DatasetEntry:
    try:
        triples = tuple(Triple.of(t["s"], t["r"], t["o"]) for t in obj["triples"])
        return DatasetEntry(
            InputGraph(triples), tuple(obj["references"]), obj["category"], obj["eid"]
        )
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"bad corpus entry: missing or malformed field {exc}") from exc


def save_corpus(entries: Iterable[DatasetEntry]) -> bytes:
    doc = {"version": CORPUS_VERSION, "entries": [entry_to_json(e) for e in entries]}
    return json.dumps(doc, ensure_ascii=False, indent=1).encode("utf-8")


def load_corpus(data: bytes | str) -> list[DatasetEntry]:
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"corpus is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("version") != CORPUS_VERSION:
        raise SchemaError(f"unsupported corpus version: {doc.get('version') if isinstance(doc, dict) else doc!r}")
    if not isinstance(doc.get("entries"), list):
        raise SchemaError("corpus has no entries list")
    return [entry_from_json(e) for e in doc["entries"]]
