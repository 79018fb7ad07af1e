"""Reading, writing and tag-scheme conversion for CoNLL-style column files.

A file holds one token per line, whitespace separated columns, and a blank
line after every sentence.  Lines starting with ``#`` are comments.
"""
from __future__ import annotations

import io
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple, Sequence

__all__ = [
    "ConllError", "Token", "Sentence", "Corpus", "EntitySpan", "Violation",
    "parse_conll", "read_conll", "write_conll", "iter_rows", "iob1_to_bio",
    "bio_to_spans", "spans_to_bio", "validate_bio", "split_tag",
    "FIELD_ROLES",
]

# roles a column can play; "_" (or any unknown role handled by iter_rows) is skipped
FIELD_ROLES = ("form", "lemma", "pos", "ne")
_SEP = re.compile(r"[ \t]+")


class ConllError(ValueError):
    pass


@dataclass(frozen=True)
class Token:
    form: str
    ne_tag: str = "O"
    lemma: str | None = None
    pos: str | None = None

    def get(self, role: str) -> str | None:
        if role == "ne":
            return self.ne_tag
        return getattr(self, role)


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[Token, ...]

    def __post_init__(self):
        if not isinstance(self.tokens, tuple):
            object.__setattr__(self, "tokens", tuple(self.tokens))
        if not self.tokens:
            raise ConllError("sentence must contain at least one token")

    def __len__(self):
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    @property
    def forms(self) -> list[str]:
        return [t.form for t in self.tokens]

    @property
    def tags(self) -> list[str]:
        return [t.ne_tag for t in self.tokens]

    def with_tags(self, tags: Sequence[str]) -> "Sentence":
        if len(tags) != len(self.tokens):
            raise ConllError("tag sequence length does not match sentence")
        return Sentence(tuple(Token(t.form, tag, t.lemma, t.pos)
                              for t, tag in zip(self.tokens, tags)))


@dataclass
class Corpus:
    sentences: list[Sentence] = field(default_factory=list)
    provenance: list[str | None] | None = None

    def __len__(self):
        return len(self.sentences)

    def __iter__(self):
        return iter(self.sentences)

    def __eq__(self, other):
        if not isinstance(other, Corpus):
            return NotImplemented
        return (self.sentences == other.sentences
                and self._prov() == other._prov())

    def _prov(self):
        if self.provenance is None or all(p is None for p in self.provenance):
            return None
        return list(self.provenance)

    def source(self, i: int) -> str | None:
        return None if self.provenance is None else self.provenance[i]


class EntitySpan(NamedTuple):
    start: int
    end: int
    category: str


class Violation(NamedTuple):
    index: int
    kind: str  # "orphan-I" | "type-switch-I" | "unknown-label"


def split_tag(tag: str) -> tuple[str, str | None]:
    """``"B-PER"`` -> ``("B", "PER")``, ``"O"`` -> ``("O", None)``.

    Raises ConllError for labels that are neither ``O`` nor ``B|I-<CAT>``.
    """
    if tag == "O":
        return "O", None
    prefix, sep, cat = tag.partition("-")
    if not sep or prefix not in ("B", "I") or not cat:
        raise ConllError(f"malformed tag {tag!r}")
    return prefix, cat


# --------------------------------------------------------------------------
# parsing / writing

def iter_rows(lines: Iterable[str | bytes]) -> Iterator[list[tuple[int, list[str]]]]:
    """Yield sentences as lists of ``(line_number, fields)``.

    Empty sentences (repeated blank lines) are skipped.
    """
    block: list[tuple[int, list[str]]] = []
    for lineno, line in enumerate(lines, 1):
        if isinstance(line, bytes):
            try:
                line = line.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise ConllError(f"line {lineno}: invalid UTF-8 ({exc.reason})") from None
        line = line.rstrip("\r\n")
        stripped = line.strip(" \t")
        if stripped.startswith("#"):
            continue
        if not stripped:
            if block:
                yield block
                block = []
            continue
        block.append((lineno, _SEP.split(stripped)))
    if block:
        yield block


def _check_columns(columns: Sequence[str]):
    roles = [c for c in columns if c != "_"]
    if "form" not in roles or "ne" not in roles:
        raise ConllError("columns must name at least 'form' and 'ne'")
    for c in roles:
        if c not in FIELD_ROLES:
            raise ConllError(f"unknown column role {c!r}")
    if len(set(roles)) != len(roles):
        raise ConllError("duplicate column role")


def _token(fields: list[str], columns: Sequence[str], lineno: int) -> Token:
    if len(fields) < len(columns):
        raise ConllError(f"line {lineno}: expected {len(columns)} fields, got {len(fields)}")
    vals = {role: f for role, f in zip(columns, fields) if role != "_"}
    return Token(vals["form"], vals["ne"], vals.get("lemma"), vals.get("pos"))


def parse_conll(text: str | bytes | Iterable[str | bytes],
                columns: Sequence[str] = ("form", "ne")) -> Corpus:
    """Parse CoNLL text into a Corpus.

    ``columns`` gives the role of each column in order; use ``"_"`` for a
    column to ignore.  Extra trailing columns are ignored.
    """
    _check_columns(columns)
    if isinstance(text, bytes):
        text = io.BytesIO(text)
    elif isinstance(text, str):
        text = io.StringIO(text)
    sentences = [Sentence(tuple(_token(f, columns, n) for n, f in block))
                 for block in iter_rows(text)]
    return Corpus(sentences)


def read_conll(path, columns: Sequence[str] = ("form", "ne")) -> Corpus:
    with open(path, "rb") as fh:
        return parse_conll(fh, columns)


def _format_sentence(si: int, sent: Sentence, columns: Sequence[str]) -> str:
    lines = []
    for ti, tok in enumerate(sent.tokens):
        vals = []
        for role in columns:
            v = tok.get(role)
            if v is None:
                raise ConllError(f"sentence {si}, token {ti}: missing column {role!r}")
            vals.append(v)
        lines.append(" ".join(vals) + "\n")
    return "".join(lines) + "\n"


def write_conll(corpus: Corpus | Iterable[Sentence], columns: Sequence[str] = ("form", "ne"),
                out=None) -> str | None:
    """Serialize canonically: single-space fields, one blank line per sentence.

    Returns the text, or writes it to ``out`` (a text file object) and
    returns None.
    """
    _check_columns(columns)
    sentences = corpus.sentences if isinstance(corpus, Corpus) else corpus
    if out is None:
        return "".join(_format_sentence(i, s, columns) for i, s in enumerate(sentences))
    for i, s in enumerate(sentences):
        out.write(_format_sentence(i, s, columns))
    return None


# --------------------------------------------------------------------------
# tag schemes

def iob1_to_bio(tags: Sequence[str]) -> list[str]:
    out = []
    prev_cat = None
    for tag in tags:
        prefix, cat = split_tag(tag)
        if prefix == "O":
            out.append("O")
        elif prefix == "I" and cat == prev_cat:
            out.append(tag)
        else:
            out.append("B-" + cat)
        prev_cat = cat
    return out


def bio_to_spans(tags: Sequence[str]) -> list[EntitySpan]:
    """Decode entity spans the way conlleval does.

    An ``I-X`` that does not continue an entity of type X opens a new one.
    Returns spans sorted by start.
    """
    spans = []
    start = cat = None
    for i, tag in enumerate(tags):
        prefix, tcat = split_tag(tag)
        if cat is not None and (prefix != "I" or tcat != cat):
            spans.append(EntitySpan(start, i - 1, cat))
            start = cat = None
        if prefix != "O" and cat is None:
            start, cat = i, tcat
    if cat is not None:
        spans.append(EntitySpan(start, len(tags) - 1, cat))
    return spans


def spans_to_bio(spans: Iterable[EntitySpan], length: int) -> list[str]:
    tags = ["O"] * length
    for span in sorted(spans, key=lambda s: (s[0], s[1])):
        start, end, cat = span
        if not 0 <= start <= end < length:
            raise ConllError(f"span {tuple(span)} out of range for length {length}")
        if any(t != "O" for t in tags[start:end + 1]):
            raise ConllError(f"span {tuple(span)} overlaps another span")
        tags[start] = "B-" + cat
        for i in range(start + 1, end + 1):
            tags[i] = "I-" + cat
    return tags


def validate_bio(tags: Sequence[str]) -> list[Violation]:
    violations = []
    prev_prefix, prev_cat = "O", None
    for i, tag in enumerate(tags):
        try:
            prefix, cat = split_tag(tag)
        except ConllError:
            violations.append(Violation(i, "unknown-label"))
            prev_prefix, prev_cat = "O", None
            continue
        if prefix == "I":
            if prev_prefix == "O":
                violations.append(Violation(i, "orphan-I"))
            elif prev_cat != cat:
                violations.append(Violation(i, "type-switch-I"))
        prev_prefix, prev_cat = prefix, cat
    return violations
