"""Rocq proof-script parsing: sentence splitting, tactic markers, theorem records.

The scanner understands just enough of the surface syntax to segment scripts
reliably: nested ``(* *)`` comments, string literals, sentence-ending periods
(a ``.`` followed by whitespace or end of input), bullet runs, and braces.
Nothing here executes tactics; goal states come from an external oracle.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterator, Optional, Sequence

__all__ = [
    "Bullet",
    "OpenBrace",
    "CloseBrace",
    "Marker",
    "Tactic",
    "TacticSequence",
    "TheoremKind",
    "RecordOrigin",
    "TheoremRecord",
    "SourceFile",
    "Severity",
    "Diagnostic",
    "split_tactics",
    "detect_goal_selectors",
    "tokenize_statement",
    "parse_file",
]


# ---------------------------------------------------------------------------
# Data model


@dataclass(frozen=True)
class Bullet:
    """A bullet run such as ``-`` or ``**``; level is the run length."""

    level: int
    symbol: str  # one of "-", "+", "*"

    def render(self) -> str:
        return self.symbol * self.level


@dataclass(frozen=True)
class OpenBrace:
    def render(self) -> str:
        return "{"


@dataclass(frozen=True)
class CloseBrace:
    def render(self) -> str:
        return "}"


Marker = Bullet | OpenBrace | CloseBrace


@dataclass(frozen=True)
class Tactic:
    """One proof sentence. ``markers`` holds what preceded it (bullets, braces),
    in source order; an unmarked tactic has an empty tuple. ``text`` is trimmed
    and keeps its terminating period when the source had one."""

    text: str
    markers: tuple[Marker, ...] = ()

    def render(self) -> str:
        parts = [m.render() for m in self.markers]
        parts.append(self.text)
        return " ".join(parts)


@dataclass(frozen=True)
class TacticSequence:
    """A parsed proof body. ``trailing_markers`` captures closing braces that
    appear after the final sentence (e.g. ``destruct n. { left. } { right. }``
    ends on a ``}`` with no tactic after it)."""

    tactics: tuple[Tactic, ...] = ()
    trailing_markers: tuple[Marker, ...] = ()

    def __len__(self) -> int:
        return len(self.tactics)

    def __iter__(self) -> Iterator[Tactic]:
        return iter(self.tactics)

    def texts(self) -> list[str]:
        return [t.text for t in self.tactics]

    def render(self) -> str:
        parts = [t.render() for t in self.tactics]
        parts.extend(m.render() for m in self.trailing_markers)
        return " ".join(parts)


class TheoremKind(Enum):
    THEOREM = "Theorem"
    LEMMA = "Lemma"
    FACT = "Fact"
    COROLLARY = "Corollary"
    PROPOSITION = "Proposition"
    REMARK = "Remark"
    EXAMPLE = "Example"


class RecordOrigin(Enum):
    ORIGINAL = "original"
    MINED_SUBPROOF = "mined_subproof"
    MINED_AFTER_K = "mined_after_k"


@dataclass(frozen=True)
class TheoremRecord:
    id: str  # "<file>#<name>"
    file: str
    name: str
    kind: TheoremKind
    statement_text: str
    proof: TacticSequence
    origin: RecordOrigin = RecordOrigin.ORIGINAL
    has_goal_selectors: bool = False
    line: Optional[int] = None

    def with_proof(self, proof: TacticSequence) -> "TheoremRecord":
        return replace(self, proof=proof)


@dataclass(frozen=True)
class SourceFile:
    path: str
    content: str


class Severity(Enum):
    INFO = "info"
    WARNING = "warning"
    ERROR = "error"


@dataclass(frozen=True)
class Diagnostic:
    file: str
    message: str
    severity: Severity = Severity.WARNING
    line: Optional[int] = None

    def __str__(self) -> str:
        loc = f"{self.file}:{self.line}" if self.line is not None else self.file
        return f"{loc}: {self.severity.value}: {self.message}"


# ---------------------------------------------------------------------------
# Sentence scanner

_BULLET_CHARS = "-+*"


@dataclass
class _Sentence:
    markers: tuple[Marker, ...]
    text: str
    line: int
    terminated: bool  # False only for residue after the last period


@dataclass
class _ScanResult:
    sentences: list[_Sentence]
    trailing_markers: tuple[Marker, ...]
    problems: list[tuple[str, int]]  # (message, line)


def _scan_sentences(text: str) -> _ScanResult:
    """Split raw script text into sentences with their leading markers.

    Comments are dropped (acting as token separators), string literals are kept
    verbatim, and whitespace outside strings is collapsed to single spaces. A
    period ends a sentence only when followed by whitespace, a comment opener,
    or end of input, so qualified names (``List.map``) and numerals never split.
    """
    sentences: list[_Sentence] = []
    problems: list[tuple[str, int]] = []
    markers: list[Marker] = []
    buf: list[str] = []
    line = 1
    sent_line = 1
    comment_depth = 0
    comment_start_line = 1
    in_string = False
    i = 0
    n = len(text)

    def flush(terminated: bool) -> None:
        nonlocal buf, markers
        body = "".join(buf).strip()
        if body:
            sentences.append(_Sentence(tuple(markers), body, sent_line, terminated))
            markers = []
        buf = []

    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
        if comment_depth > 0:
            if text.startswith("(*", i):
                comment_depth += 1
                i += 2
                continue
            if text.startswith("*)", i):
                comment_depth -= 1
                i += 2
                if comment_depth == 0 and buf and buf[-1] != " ":
                    buf.append(" ")
                continue
            i += 1
            continue
        if in_string:
            buf.append(ch)
            if ch == '"':
                if i + 1 < n and text[i + 1] == '"':  # doubled quote stays in-string
                    buf.append('"')
                    i += 2
                    continue
                in_string = False
            i += 1
            continue
        if text.startswith("(*", i):
            comment_depth = 1
            comment_start_line = line
            i += 2
            continue
        if text.startswith("*)", i):
            problems.append(("stray comment closer '*)'", line))
            i += 2
            continue
        if ch == '"':
            if not buf:
                sent_line = line
            in_string = True
            buf.append(ch)
            i += 1
            continue
        if not buf:
            # sentence head: bullets and braces are markers, not text
            if ch in _BULLET_CHARS:
                j = i
                while j < n and text[j] == ch:
                    j += 1
                markers.append(Bullet(level=j - i, symbol=ch))
                i = j
                continue
            if ch == "{":
                markers.append(OpenBrace())
                i += 1
                continue
            if ch == "}":
                markers.append(CloseBrace())
                i += 1
                continue
            if ch.isspace():
                i += 1
                continue
            sent_line = line
            buf.append(ch)
            i += 1
            continue
        if ch == ".":
            nxt = text[i + 1] if i + 1 < n else ""
            if nxt == "" or nxt.isspace() or text.startswith("(*", i + 1):
                buf.append(".")
                i += 1
                flush(terminated=True)
                continue
            buf.append(ch)
            i += 1
            continue
        if ch.isspace():
            if buf[-1] != " ":
                buf.append(" ")
            i += 1
            continue
        buf.append(ch)
        i += 1

    if comment_depth > 0:
        problems.append(("unterminated comment", comment_start_line))
    if in_string:
        problems.append(("unterminated string literal", sent_line))
    flush(terminated=False)
    return _ScanResult(sentences, tuple(markers), problems)


def split_tactics(text: str) -> TacticSequence:
    """Split a proof body into tactics.

    Periods inside comments, strings, and qualified names do not split;
    semicolon compounds stay one tactic. Leading bullet runs and braces become
    markers on the following tactic. Residue after the last period is kept as
    a final unterminated tactic (callers decide whether to diagnose it).
    """
    scan = _scan_sentences(text)
    tactics = tuple(Tactic(s.text, s.markers) for s in scan.sentences)
    return TacticSequence(tactics, scan.trailing_markers)


# ---------------------------------------------------------------------------
# Goal selectors

_SELECTOR_RE = re.compile(
    r"""(?:all|!|\d+(?:\s*[,-]\s*\d+)*|\[[A-Za-z_][A-Za-z0-9_']*\])\s*:(?!=)"""
)


def _selector_at(text: str, pos: int) -> bool:
    while pos < len(text) and text[pos].isspace():
        pos += 1
    return _SELECTOR_RE.match(text, pos) is not None


def detect_goal_selectors(seq: TacticSequence) -> bool:
    """True when any tactic starts a command with a goal selector
    (``all:``, ``!:``, ``2:``, ``1,3:``, ``1-2:``, ``[name]:``).

    Command positions are the tactic start and positions after top-level
    semicolons; matches inside strings or bracketed/parenthesized groups
    do not count.
    """
    for tactic in seq:
        text = tactic.text
        if _selector_at(text, 0):
            return True
        depth = 0
        in_string = False
        i = 0
        while i < len(text):
            ch = text[i]
            if in_string:
                if ch == '"':
                    if i + 1 < len(text) and text[i + 1] == '"':
                        i += 2
                        continue
                    in_string = False
            elif ch == '"':
                in_string = True
            elif ch in "([":
                depth += 1
            elif ch in ")]":
                depth = max(0, depth - 1)
            elif ch == ";" and depth == 0:
                if _selector_at(text, i + 1):
                    return True
            i += 1
    return False


# ---------------------------------------------------------------------------
# Statement tokens

_TOKEN_SEP_RE = re.compile(r"[\s(),:;]+")


def tokenize_statement(text: str) -> list[str]:
    """Case-sensitive token split on whitespace and ``( ) , : ;``.

    Duplicates are preserved: ``forall n : nat, n = 0 \\/ n <> 0`` gives
    ``[forall, n, nat, n, =, 0, \\/, n, <>, 0]``.
    """
    return [tok for tok in _TOKEN_SEP_RE.split(text) if tok]


# ---------------------------------------------------------------------------
# File parsing

_KIND_NAMES = "|".join(k.value for k in TheoremKind)
_THEOREM_RE = re.compile(
    rf"^({_KIND_NAMES})\s+([A-Za-z_][A-Za-z0-9_']*)\s*(.*)\.$", re.DOTALL
)
_PROOF_OPENER_RE = re.compile(r"^Proof(\s+using\b[^.]*)?\.$")
_TERMINATORS = {"Qed.", "Defined.", "Admitted.", "Abort."}
# proof-carrying declarations outside the supported theorem kinds
_OTHER_PROOF_HEAD_RE = re.compile(
    r"^(Definition|Fixpoint|Instance|Program|Goal|Next\s+Obligation|Add\s+Morphism)\b"
)


def parse_file(source: SourceFile) -> tuple[list[TheoremRecord], list[Diagnostic]]:
    """Extract one TheoremRecord per completed theorem block, in source order.

    ``Admitted.``/``Abort.`` blocks are skipped with a Diagnostic, as are
    proof-carrying declarations outside the supported kinds. ``Proof.`` and
    ``Proof using ...`` openers are stripped from proof bodies; ``Defined.``
    is accepted like ``Qed.``. Parsing always continues past a bad block.
    """
    records: list[TheoremRecord] = []
    diagnostics: list[Diagnostic] = []
    scan = _scan_sentences(source.content)
    for message, line in scan.problems:
        diagnostics.append(Diagnostic(source.path, message, Severity.WARNING, line))

    seen_names: dict[str, int] = {}
    sentences = scan.sentences
    i = 0
    n_sent = len(sentences)
    while i < n_sent:
        sent = sentences[i]
        match = _THEOREM_RE.match(sent.text) if sent.terminated else None
        if match is None:
            if _OTHER_PROOF_HEAD_RE.match(sent.text) and _looks_like_proof_block(
                sentences, i
            ):
                diagnostics.append(
                    Diagnostic(
                        source.path,
                        f"unsupported proof-carrying declaration skipped: "
                        f"{sent.text.split()[0]}",
                        Severity.INFO,
                        sent.line,
                    )
                )
                i = _skip_to_terminator(sentences, i + 1)
                continue
            i += 1
            continue

        kind_name, name, raw_statement = match.groups()
        statement = raw_statement.strip()
        if statement.startswith(":"):
            statement = statement[1:].strip()

        body: list[Tactic] = []
        terminator: Optional[str] = None
        j = i + 1
        if j < n_sent and sentences[j].text.startswith("Proof"):
            opener = sentences[j]
            if _PROOF_OPENER_RE.match(opener.text):
                j += 1
            elif opener.text.split()[0] == "Proof":
                diagnostics.append(
                    Diagnostic(
                        source.path,
                        f"unsupported proof opener in {name}: {opener.text!r}",
                        Severity.WARNING,
                        opener.line,
                    )
                )
                j += 1
        while j < n_sent:
            cur = sentences[j]
            if cur.terminated and cur.text in _TERMINATORS:
                terminator = cur.text
                break
            if cur.terminated and _THEOREM_RE.match(cur.text):
                break  # ran into the next theorem: this block never closed
            if not cur.terminated:
                diagnostics.append(
                    Diagnostic(
                        source.path,
                        f"unterminated sentence in proof of {name}",
                        Severity.WARNING,
                        cur.line,
                    )
                )
            body.append(Tactic(cur.text, cur.markers))
            j += 1

        if terminator is None:
            diagnostics.append(
                Diagnostic(
                    source.path,
                    f"proof of {name} has no terminator; block skipped",
                    Severity.WARNING,
                    sent.line,
                )
            )
            i = j
            continue
        if terminator in ("Admitted.", "Abort."):
            diagnostics.append(
                Diagnostic(
                    source.path,
                    f"{name} ends with {terminator} and was skipped",
                    Severity.INFO,
                    sent.line,
                )
            )
            i = j + 1
            continue

        count = seen_names.get(name, 0)
        seen_names[name] = count + 1
        record_id = f"{source.path}#{name}"
        if count:
            record_id = f"{record_id}~{count + 1}"
            diagnostics.append(
                Diagnostic(
                    source.path,
                    f"duplicate theorem name {name}; id disambiguated",
                    Severity.WARNING,
                    sent.line,
                )
            )

        proof = TacticSequence(tuple(body))
        records.append(
            TheoremRecord(
                id=record_id,
                file=source.path,
                name=name,
                kind=TheoremKind(kind_name),
                statement_text=statement,
                proof=proof,
                origin=RecordOrigin.ORIGINAL,
                has_goal_selectors=detect_goal_selectors(proof),
                line=sent.line,
            )
        )
        i = j + 1
    return records, diagnostics


def _looks_like_proof_block(sentences: Sequence[_Sentence], i: int) -> bool:
    nxt = sentences[i + 1] if i + 1 < len(sentences) else None
    return nxt is not None and nxt.text.startswith("Proof")


def _skip_to_terminator(sentences: Sequence[_Sentence], i: int) -> int:
    while i < len(sentences):
        if sentences[i].terminated and sentences[i].text in _TERMINATORS:
            return i + 1
        if sentences[i].terminated and _THEOREM_RE.match(sentences[i].text):
            return i
        i += 1
    return i
