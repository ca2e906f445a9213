"""Document ingestion, normalization, and tokenization.

Two on-disk formats are supported: the canonical JSONL interchange
format (one ``{"id", "text", "label"}`` object per line) and PubMed
efetch XML, from which major-topic MeSH descriptor headings are
extracted as class labels.
"""

from __future__ import annotations

import json
import logging
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from litclust.errors import DuplicateId, EmptyCorpus, ParseError

log = logging.getLogger(__name__)

# Token = maximal run of letters, digits, or hyphens; tokens shorter than
# 2 characters are dropped.  Underscores are separators, so they are
# cleared before the run scan ("\w" would otherwise keep them).
_TOKEN_RE = re.compile(r"[\w-]+", re.UNICODE)
_MIN_TOKEN_LEN = 2


@dataclass(frozen=True)
class Document:
    """One text record with a stable identifier and an optional class label."""

    id: str
    text: str
    label: str | None = None


@dataclass(frozen=True)
class TokenStream:
    doc_id: str
    tokens: tuple[str, ...]


class Corpus:
    """Immutable, id-sorted collection of documents.

    ``label_set`` is the sorted set of distinct non-null labels and
    ``skipped`` counts input records dropped for having no usable text.
    """

    def __init__(self, documents: Iterable[Document], skipped: int = 0):
        docs = sorted(documents, key=lambda d: d.id)
        seen: set[str] = set()
        for doc in docs:
            if doc.id in seen:
                raise DuplicateId(f"duplicate document id {doc.id!r}")
            seen.add(doc.id)
        self.documents: tuple[Document, ...] = tuple(docs)
        self.label_set: tuple[str, ...] = tuple(
            sorted({d.label for d in docs if d.label is not None})
        )
        self.skipped = skipped

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)

    def __eq__(self, other) -> bool:
        return isinstance(other, Corpus) and self.documents == other.documents

    def doc_ids(self) -> tuple[str, ...]:
        return tuple(d.id for d in self.documents)

    def labels(self) -> tuple[str | None, ...]:
        """Per-document labels in corpus order."""
        return tuple(d.label for d in self.documents)


def normalize_text(text: str) -> str:
    """Collapse all whitespace runs to single spaces and strip the ends."""
    return " ".join(text.split())


def tokenize_text(text: str) -> tuple[str, ...]:
    lowered = text.lower().replace("_", " ")
    return tuple(
        t for t in _TOKEN_RE.findall(lowered) if len(t) >= _MIN_TOKEN_LEN
    )


def tokenize(doc: Document) -> TokenStream:
    """Lowercase tokens of a document; pure and deterministic."""
    return TokenStream(doc_id=doc.id, tokens=tokenize_text(doc.text))


def load_corpus(
    path: str | Path,
    format: str = "jsonl",
    class_labels: Sequence[str] | None = None,
) -> Corpus:
    """Load a corpus file in the declared format.

    Documents without text are skipped (counted on the returned corpus),
    duplicate ids raise, and the result is sorted by id.  For PubMed XML,
    ``class_labels`` restricts and prioritizes which major MeSH headings
    may serve as labels; the first match in that order wins.
    """
    path = Path(path)
    if format == "jsonl":
        docs, skipped = _read_jsonl(path)
    elif format == "pubmed_xml":
        docs, skipped = _read_pubmed_xml(path, class_labels)
    else:
        raise ParseError(f"unknown corpus format {format!r}")
    if not docs:
        raise EmptyCorpus(f"no usable documents in {path}")
    if skipped:
        log.warning("skipped %d records without text in %s", skipped, path)
    return Corpus(docs, skipped=skipped)


def save_jsonl(corpus: Corpus, path: str | Path) -> None:
    """Write the canonical JSONL interchange form (UTF-8, sorted by id)."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for doc in corpus.documents:
            rec = {"id": doc.id, "text": doc.text, "label": doc.label}
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")


def _read_jsonl(path: Path) -> tuple[list[Document], int]:
    docs: list[Document] = []
    skipped = 0
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from exc
            if not isinstance(rec, dict) or "id" not in rec:
                raise ParseError(f"{path}:{lineno}: record must be an object with an 'id'")
            doc_id = str(rec["id"]).strip()
            if not doc_id:
                raise ParseError(f"{path}:{lineno}: empty document id")
            text = normalize_text(str(rec.get("text") or ""))
            if not text:
                skipped += 1
                continue
            label = rec.get("label")
            docs.append(Document(id=doc_id, text=text, label=None if label is None else str(label)))
    return docs, skipped


def _read_pubmed_xml(
    path: Path, class_labels: Sequence[str] | None
) -> tuple[list[Document], int]:
    """Parse efetch ``rettype=abstract`` XML into documents.

    The abstract text is the concatenation of all AbstractText sections;
    the label is a major-topic MeSH descriptor heading (attribute
    MajorTopicYN="Y").  A document with several major headings gets the
    first one in ``class_labels`` priority order, or the first in
    document order when no priority list is given.
    """
    try:
        tree = ET.parse(path)
    except ET.ParseError as exc:
        raise ParseError(f"{path}: malformed XML at {exc.position}") from exc

    docs: list[Document] = []
    skipped = 0
    for article in tree.getroot().iter("PubmedArticle"):
        pmid = article.findtext(".//PMID")
        if not pmid:
            skipped += 1
            continue
        pieces = [
            (el.text or "") for el in article.findall(".//Abstract/AbstractText")
        ]
        text = normalize_text(" ".join(pieces))
        if not text:
            skipped += 1
            continue
        majors = [
            (el.text or "").strip()
            for el in article.findall(".//MeshHeading/DescriptorName")
            if el.get("MajorTopicYN") == "Y" and (el.text or "").strip()
        ]
        label = _pick_label(majors, class_labels)
        docs.append(Document(id=pmid.strip(), text=text, label=label))
    return docs, skipped


def _pick_label(
    majors: list[str], class_labels: Sequence[str] | None
) -> str | None:
    if not majors:
        return None
    if class_labels is None:
        return majors[0]
    for wanted in class_labels:
        if wanted in majors:
            return wanted
    return None
