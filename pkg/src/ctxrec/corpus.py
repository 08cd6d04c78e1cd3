"""Document collection: parsing, validation, persistence, and lookup.

A corpus is an immutable set of documents with hierarchical segment
structure (sections -> paragraphs -> sentences), in-text citation markers
addressed by (section, paragraph, sentence) indices, and optional context
annotations. Input arrives as JSONL, one document per line; text is stored
verbatim (normalization happens downstream).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

CORPUS_FORMAT = "ctxrec-corpus"
CORPUS_VERSION = 1


class CorpusError(Exception):
    """Malformed input, broken invariant, or bad on-disk state."""


class DocumentNotFound(KeyError):
    """Lookup of a document id that is not in the corpus."""

    def __str__(self) -> str:  # KeyError quotes its repr by default
        return self.args[0] if self.args else ""


@dataclass
class Section:
    """A titled block of paragraphs; each paragraph is a list of sentences."""

    heading: str
    paragraphs: list[list[str]]

    def sentences(self) -> Iterator[str]:
        for para in self.paragraphs:
            yield from para


@dataclass
class CitationMarker:
    """An in-text citation occurrence, addressed by its sentence position.

    ``dangling`` is derived at corpus-construction time: set iff the target
    id is absent from the corpus. Dangling markers are kept, not dropped.
    """

    target: str
    section: int
    paragraph: int
    sentence: int
    dangling: bool = False


@dataclass
class Annotation:
    """An asserted contextual relation to another document (e.g. from a
    curated knowledge graph). Context labels are validated against the
    configured context set when the context graph is built, not here."""

    context: str
    target: str


@dataclass
class Document:
    id: str
    title: str
    sections: list[Section]
    citations: list[CitationMarker] = field(default_factory=list)
    annotations: list[Annotation] = field(default_factory=list)

    def iter_sentences(self) -> Iterator[str]:
        for sec in self.sections:
            yield from sec.sentences()

    def sentence_at(self, section: int, paragraph: int, sentence: int) -> str:
        return self.sections[section].paragraphs[paragraph][sentence]


@dataclass
class IngestReport:
    documents: int
    citations: int
    dangling: int


@dataclass
class CorpusStats:
    documents: int
    sections: int
    sentences: int
    citations: int
    dangling: int
    annotations: int


def _validate_document(doc: Document, where: str) -> None:
    if not doc.id:
        raise CorpusError(f"{where}: document id must be non-empty")
    if not doc.sections:
        raise CorpusError(f"{where}: document {doc.id!r} has no sections")
    for s_idx, sec in enumerate(doc.sections):
        if not sec.paragraphs:
            raise CorpusError(
                f"{where}: document {doc.id!r} section {s_idx} has no paragraphs"
            )
        for p_idx, para in enumerate(sec.paragraphs):
            for t_idx, sentence in enumerate(para):
                if not sentence.strip():
                    raise CorpusError(
                        f"{where}: document {doc.id!r} has an empty sentence at "
                        f"({s_idx}, {p_idx}, {t_idx})"
                    )
    for marker in doc.citations:
        ok = (
            0 <= marker.section < len(doc.sections)
            and 0 <= marker.paragraph < len(doc.sections[marker.section].paragraphs)
            and 0
            <= marker.sentence
            < len(doc.sections[marker.section].paragraphs[marker.paragraph])
        )
        if not ok:
            raise CorpusError(
                f"{where}: document {doc.id!r} citation to {marker.target!r} has "
                f"out-of-bounds position ({marker.section}, {marker.paragraph}, "
                f"{marker.sentence})"
            )


class Corpus:
    """Immutable document collection with O(1) id lookup and a dense
    ordinal index (id <-> integer, in insertion order).

    Construction validates every document, rejects duplicate ids, and
    (re)computes the dangling flag on every citation marker. After that
    the corpus is treated as read-only and is safe for concurrent readers.
    """

    def __init__(self, documents: Sequence[Document]):
        self._docs: dict[str, Document] = {}
        self._order: list[str] = []
        for doc in documents:
            _validate_document(doc, "corpus")
            if doc.id in self._docs:
                raise CorpusError(f"duplicate document id {doc.id!r}")
            self._docs[doc.id] = doc
            self._order.append(doc.id)
        self._ordinals = {doc_id: i for i, doc_id in enumerate(self._order)}
        for doc in self._docs.values():
            for marker in doc.citations:
                marker.dangling = marker.target not in self._docs

    def __len__(self) -> int:
        return len(self._order)

    def __iter__(self) -> Iterator[Document]:
        for doc_id in self._order:
            yield self._docs[doc_id]

    def __contains__(self, doc_id: object) -> bool:
        return doc_id in self._docs

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Corpus):
            return NotImplemented
        return self._order == other._order and self._docs == other._docs

    def ids(self) -> list[str]:
        return list(self._order)

    def get(self, doc_id: str) -> Document:
        try:
            return self._docs[doc_id]
        except KeyError:
            raise DocumentNotFound(f"document {doc_id!r} not in corpus") from None

    def ordinal(self, doc_id: str) -> int:
        try:
            return self._ordinals[doc_id]
        except KeyError:
            raise DocumentNotFound(f"document {doc_id!r} not in corpus") from None

    def id_at(self, ordinal: int) -> str:
        return self._order[ordinal]


def _parse_record(obj: object, where: str) -> Document:
    if not isinstance(obj, dict):
        raise CorpusError(f"{where}: document record must be a JSON object")

    def expect(value: object, kind: type, what: str):
        if not isinstance(value, kind):
            raise CorpusError(f"{where}: {what} must be {kind.__name__}")
        return value

    doc_id = expect(obj.get("id", ""), str, "id")
    title = expect(obj.get("title", ""), str, "title")

    sections = []
    for sec in expect(obj.get("sections", []), list, "sections"):
        expect(sec, dict, "section")
        heading = expect(sec.get("heading", ""), str, "heading")
        paragraphs = []
        for para in expect(sec.get("paragraphs", []), list, "paragraphs"):
            expect(para, list, "paragraph")
            paragraphs.append([expect(s, str, "sentence") for s in para])
        sections.append(Section(heading=heading, paragraphs=paragraphs))

    citations = []
    for cit in expect(obj.get("citations", []), list, "citations"):
        expect(cit, dict, "citation")
        citations.append(
            CitationMarker(
                target=expect(cit.get("target", ""), str, "citation target"),
                section=expect(cit.get("section", 0), int, "citation section"),
                paragraph=expect(cit.get("paragraph", 0), int, "citation paragraph"),
                sentence=expect(cit.get("sentence", 0), int, "citation sentence"),
            )
        )

    annotations = []
    for ann in expect(obj.get("annotations", []), list, "annotations"):
        expect(ann, dict, "annotation")
        annotations.append(
            Annotation(
                context=expect(ann.get("context", ""), str, "annotation context"),
                target=expect(ann.get("target", ""), str, "annotation target"),
            )
        )

    doc = Document(
        id=doc_id,
        title=title,
        sections=sections,
        citations=citations,
        annotations=annotations,
    )
    _validate_document(doc, where)
    return doc


def ingest_jsonl(path: str | Path) -> tuple[Corpus, IngestReport]:
    """Parse a JSONL file (one document per line) into a validated corpus.

    Blank lines are ignored. Any malformed line, invariant violation, or
    duplicate id is a hard error naming the offending line.

    Returns:
        The corpus plus an ingestion report (documents, citation markers,
        dangling markers).
    """
    path = Path(path)
    if not path.exists():
        raise CorpusError(f"no such file: {path}")

    documents: list[Document] = []
    first_line: dict[str, int] = {}
    with path.open("r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            where = f"{path.name}:{line_no}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{where}: invalid JSON: {exc.msg}") from None
            doc = _parse_record(obj, where)
            if doc.id in first_line:
                raise CorpusError(
                    f"duplicate document id {doc.id!r} on lines "
                    f"{first_line[doc.id]} and {line_no}"
                )
            first_line[doc.id] = line_no
            documents.append(doc)

    corpus = Corpus(documents)
    n_citations = sum(len(d.citations) for d in corpus)
    n_dangling = sum(1 for d in corpus for m in d.citations if m.dangling)
    return corpus, IngestReport(
        documents=len(corpus), citations=n_citations, dangling=n_dangling
    )


def document_to_record(doc: Document) -> dict:
    """Serialize a document back to the JSONL record schema."""
    record: dict = {
        "id": doc.id,
        "title": doc.title,
        "sections": [
            {"heading": sec.heading, "paragraphs": [list(p) for p in sec.paragraphs]}
            for sec in doc.sections
        ],
        "citations": [
            {
                "target": m.target,
                "section": m.section,
                "paragraph": m.paragraph,
                "sentence": m.sentence,
            }
            for m in doc.citations
        ],
    }
    if doc.annotations:
        record["annotations"] = [
            {"context": a.context, "target": a.target} for a in doc.annotations
        ]
    return record


def save(corpus: Corpus, directory: str | Path) -> None:
    """Write the corpus to a directory: documents.jsonl + manifest.json.

    The manifest records the layout version, the document count, and a
    sha256 checksum of the documents file, verified again on load.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    lines = [
        json.dumps(document_to_record(doc), ensure_ascii=False) for doc in corpus
    ]
    payload = ("\n".join(lines) + "\n" if lines else "").encode("utf-8")
    (directory / "documents.jsonl").write_bytes(payload)
    manifest = {
        "format": CORPUS_FORMAT,
        "version": CORPUS_VERSION,
        "count": len(corpus),
        "checksum": hashlib.sha256(payload).hexdigest(),
    }
    (directory / "manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
    )


def load(directory: str | Path) -> Corpus:
    """Load a corpus written by :func:`save`, verifying layout and checksum."""
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    documents_path = directory / "documents.jsonl"
    if not manifest_path.exists() or not documents_path.exists():
        raise CorpusError(f"{directory} is not a corpus directory")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CorpusError(f"corrupt manifest in {directory}: {exc.msg}") from None
    if manifest.get("format") != CORPUS_FORMAT:
        raise CorpusError(f"{directory} is not a corpus directory")
    if manifest.get("version") != CORPUS_VERSION:
        raise CorpusError(
            f"unsupported corpus layout version {manifest.get('version')!r}"
        )
    payload = documents_path.read_bytes()
    checksum = hashlib.sha256(payload).hexdigest()
    if checksum != manifest.get("checksum"):
        raise CorpusError(f"checksum mismatch in {directory}: corpus is corrupt")

    documents = []
    for line_no, line in enumerate(payload.decode("utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        where = f"documents.jsonl:{line_no}"
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"{where}: invalid JSON: {exc.msg}") from None
        documents.append(_parse_record(obj, where))
    corpus = Corpus(documents)
    if len(corpus) != manifest.get("count"):
        raise CorpusError(
            f"document count {len(corpus)} does not match manifest "
            f"count {manifest.get('count')}"
        )
    return corpus


def stats(corpus: Corpus) -> CorpusStats:
    """Exact counters over the corpus (matches a direct traversal)."""
    n_sections = 0
    n_sentences = 0
    n_citations = 0
    n_dangling = 0
    n_annotations = 0
    for doc in corpus:
        n_sections += len(doc.sections)
        n_sentences += sum(1 for _ in doc.iter_sentences())
        n_citations += len(doc.citations)
        n_dangling += sum(1 for m in doc.citations if m.dangling)
        n_annotations += len(doc.annotations)
    return CorpusStats(
        documents=len(corpus),
        sections=n_sections,
        sentences=n_sentences,
        citations=n_citations,
        dangling=n_dangling,
        annotations=n_annotations,
    )
