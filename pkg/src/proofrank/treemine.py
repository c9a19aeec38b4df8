"""Proof trees and sub-proof mining.

A bullet-structured proof script is lifted into a tree of proof states: the
root is the initial state, each tactic application adds the state(s) it
produces, and a branching tactic (one followed by bullet groups or brace
groups) contributes one edge per group, all labeled with that tactic. Leaves
are states with no remaining goals. Mining then reads one new theorem off
every non-root state that still has proof work below it, exactly the states a
prover would pass through.

No goal inference happens here; goal texts come from a GoalOracle dump
produced by a checker with access to the prover.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional, Sequence

from .parsing import (
    Bullet,
    CloseBrace,
    Marker,
    OpenBrace,
    RecordOrigin,
    Tactic,
    TacticSequence,
    TheoremRecord,
)

__all__ = [
    "ProofNode",
    "ProofTree",
    "MinedRecord",
    "GoalOracle",
    "TreeError",
    "MalformedBullets",
    "GoalSelectorUnsupported",
    "UnknownNode",
    "KOutOfRange",
    "build_tree",
    "linearize",
    "mine_subproofs",
    "mine_after_k",
    "mined_to_record",
]


class TreeError(Exception):
    """Base for tree construction and mining failures."""


class MalformedBullets(TreeError):
    pass


class GoalSelectorUnsupported(TreeError):
    pass


class UnknownNode(TreeError):
    pass


class KOutOfRange(TreeError):
    pass


# ---------------------------------------------------------------------------
# Tree model


@dataclass
class ProofNode:
    """One proof state. ``incoming`` is the tactic on the edge from the parent
    (None at the root). ``path`` is the child-index route from the root and
    doubles as the node id."""

    path: tuple[int, ...]
    incoming: Optional[Tactic]
    children: list["ProofNode"] = field(default_factory=list)

    @property
    def depth(self) -> int:
        return len(self.path)

    def is_leaf(self) -> bool:
        return not self.children


@dataclass
class ProofTree:
    root: ProofNode

    def node_count(self) -> int:
        return sum(1 for _ in self.walk())

    def walk(self) -> Iterator[ProofNode]:
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def node_at(self, path: Sequence[int]) -> ProofNode:
        node = self.root
        for idx in path:
            if idx >= len(node.children):
                raise UnknownNode(f"no node at path {list(path)}")
            node = node.children[idx]
        return node


# ---------------------------------------------------------------------------
# Parsing the marker stream into nested steps

_BRACE = ("{",)  # sentinel group kind for anonymous brace levels


@dataclass
class _Step:
    tactic: Tactic
    groups: list[list["_Step"]] = field(default_factory=list)


class _TokenStream:
    """Flattens tactics into marker/tactic tokens for recursive descent."""

    def __init__(self, seq: TacticSequence):
        self.tokens: list[Marker | Tactic] = []
        for tactic in seq:
            self.tokens.extend(tactic.markers)
            self.tokens.append(Tactic(tactic.text))  # markers now externalized
        self.tokens.extend(seq.trailing_markers)
        self.pos = 0

    def peek(self) -> Marker | Tactic | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self) -> Marker | Tactic:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok


def _bullet_kind(b: Bullet) -> tuple[str, int]:
    return (b.symbol, b.level)


def _parse_block(
    stream: _TokenStream,
    own_kind: Optional[tuple] ,
    stack: list[tuple],
) -> list[_Step]:
    """Parse steps until this block ends.

    A block ends at end of stream, at a bullet matching ``own_kind`` (a sibling
    group follows), at a bullet matching an enclosing kind, or at the ``}``
    closing an enclosing brace. Brace scopes are bullet barriers: a bullet may
    only match kinds introduced since the nearest enclosing brace.
    """
    steps: list[_Step] = []
    while True:
        tok = stream.peek()
        if tok is None:
            return steps
        if isinstance(tok, Tactic):
            if steps and steps[-1].groups:
                # `assert P. { proof. } rest.` style: after `}` the remaining
                # tactics prove the next goal, i.e. one last anonymous group
                steps[-1].groups.append(_parse_block(stream, own_kind, stack))
                return steps
            stream.next()
            steps.append(_Step(tok))
            continue
        if isinstance(tok, Bullet):
            kind = _bullet_kind(tok)
            if kind == own_kind:
                return steps  # sibling group; caller continues the run
            # brace scopes reset bullet context: only kinds introduced since
            # the nearest enclosing brace can be closed by this bullet
            visible = stack[_innermost_brace_index(stack):]
            if kind in visible:
                return steps  # closes up to an enclosing bullet level
            if not steps:
                raise MalformedBullets(
                    f"bullet {tok.render()!r} has no preceding tactic to branch from"
                )
            if steps[-1].groups:
                raise MalformedBullets(
                    f"bullet {tok.render()!r} starts a second group run after "
                    "one already closed at this level"
                )
            steps[-1].groups = _parse_group_run(stream, kind, stack)
            continue
        if isinstance(tok, OpenBrace):
            if not steps:
                raise MalformedBullets("brace group has no preceding tactic")
            stream.next()
            group = _parse_block(stream, None, stack + [_BRACE])
            closer = stream.peek()
            if not isinstance(closer, CloseBrace):
                raise MalformedBullets("unbalanced braces: missing '}'")
            stream.next()
            steps[-1].groups.append(group)
            # sibling anonymous groups attach to the same step; anything else
            # after a closed group run is handled by the checks above
            continue
        if isinstance(tok, CloseBrace):
            if own_kind is None and stack and stack[-1] is _BRACE:
                return steps  # caller consumes the '}'
            if _BRACE in stack:
                return steps  # propagate up to the brace owner
            raise MalformedBullets("unbalanced braces: stray '}'")
    return steps


def _parse_group_run(
    stream: _TokenStream, kind: tuple, stack: list[tuple]
) -> list[list[_Step]]:
    groups: list[list[_Step]] = []
    while True:
        tok = stream.peek()
        if isinstance(tok, Bullet) and _bullet_kind(tok) == kind:
            stream.next()
            groups.append(_parse_block(stream, kind, stack + [kind]))
        else:
            return groups


def _innermost_brace_index(stack: list[tuple]) -> int:
    for i in range(len(stack) - 1, -1, -1):
        if stack[i] is _BRACE:
            return i + 1
    return 0


# ---------------------------------------------------------------------------
# Tree construction


def build_tree(seq: TacticSequence) -> ProofTree:
    """Build the proof-state tree for a bullet-structured tactic sequence.

    Consecutive unmarked tactics chain; a tactic followed by bullet or brace
    groups branches, one child per group. Legacy scripts that solve subgoals
    sequentially without bullets parse as plain chains (no branch inference).
    Raises MalformedBullets on inconsistent bullet/brace structure.
    """
    stream = _TokenStream(seq)
    steps = _parse_block(stream, None, [])
    if stream.peek() is not None:
        tok = stream.next()
        if isinstance(tok, CloseBrace):
            raise MalformedBullets("unbalanced braces: stray '}'")
        raise MalformedBullets(f"unexpected {tok!r} at top level")
    root = ProofNode(path=(), incoming=None)
    _attach(steps, root)
    return ProofTree(root)


def _attach(steps: list[_Step], parent: ProofNode) -> None:
    current = parent
    for step in steps:
        if not step.groups:
            child = ProofNode(
                path=current.path + (len(current.children),), incoming=step.tactic
            )
            current.children.append(child)
            current = child
        else:
            # a branching step is always last in its block: the parser either
            # returns at the run's end or folds the remainder into a group
            for group in step.groups:
                child = ProofNode(
                    path=current.path + (len(current.children),),
                    incoming=step.tactic,
                )
                current.children.append(child)
                _attach(group, child)


# ---------------------------------------------------------------------------
# Linearization

_BULLET_CYCLE = "-+*"


def _canonical_bullet(depth: int) -> Bullet:
    return Bullet(level=1 + depth // 3, symbol=_BULLET_CYCLE[depth % 3])


def linearize(tree: ProofTree, path: Sequence[int] = ()) -> TacticSequence:
    """Emit the tactic sequence proving the state at ``path``: a depth-first
    walk of the subtree below it. Branch children are prefixed with canonical
    bullets by nesting depth (``-``, ``+``, ``*``, then ``--``, ``++``, ...),
    so the root of a chain-only tree reproduces the original sequence.
    """
    node = tree.node_at(path)
    out: list[Tactic] = []
    _emit(node, 0, (), out)
    return TacticSequence(tuple(out))


def _emit(
    node: ProofNode, depth: int, pending: tuple[Marker, ...], out: list[Tactic]
) -> None:
    if node.is_leaf():
        return
    first = node.children[0]
    if len(node.children) == 1:
        out.append(Tactic(first.incoming.text, pending))
        _emit(first, depth, (), out)
        return
    # all children of a branching state share the same incoming tactic
    out.append(Tactic(first.incoming.text, pending))
    bullet = _canonical_bullet(depth)
    for child in node.children:
        _emit(child, depth + 1, (bullet,), out)


# ---------------------------------------------------------------------------
# Mining


@dataclass(frozen=True)
class MinedRecord:
    parent_id: str
    node_path: tuple[int, ...]
    name: str
    statement_text: str
    proof: TacticSequence
    origin: RecordOrigin
    goal_text: Optional[str] = None


class GoalOracle:
    """Goal texts for (theorem id, node path) pairs, loaded from a JSON dump:
    ``[{"theorem_id": ..., "node_path": [...], "goal": ...}, ...]``."""

    def __init__(self, entries: Mapping[tuple[str, tuple[int, ...]], str] | None = None):
        self._goals: dict[tuple[str, tuple[int, ...]], str] = dict(entries or {})

    @classmethod
    def from_json(cls, text: str) -> "GoalOracle":
        data = json.loads(text)
        entries = {
            (item["theorem_id"], tuple(item["node_path"])): item["goal"]
            for item in data
        }
        return cls(entries)

    def lookup(self, theorem_id: str, path: tuple[int, ...]) -> Optional[str]:
        return self._goals.get((theorem_id, path))

    def __len__(self) -> int:
        return len(self._goals)


def _placeholder_statement(record: TheoremRecord, path: tuple[int, ...]) -> str:
    return f"{record.statement_text} [after {'.'.join(str(i) for i in path)}]"


def _require_plain(record: TheoremRecord) -> None:
    if record.has_goal_selectors:
        raise GoalSelectorUnsupported(
            f"{record.id} uses goal selectors; its script order does not "
            "determine a state tree"
        )


def mine_subproofs(
    record: TheoremRecord, goals: Optional[GoalOracle] = None
) -> list[MinedRecord]:
    """One mined theorem per non-root state with proof work below it, in
    depth-first order. The root is excluded (its linearization is the original
    proof), as are done-leaves (nothing left to prove). Statements come from
    the oracle when available, else a positional placeholder. No deduplication.
    """
    _require_plain(record)
    tree = build_tree(record.proof)
    mined: list[MinedRecord] = []
    index = 0
    for node in tree.walk():
        if node.path == () or node.is_leaf():
            continue
        index += 1
        goal = goals.lookup(record.id, node.path) if goals else None
        mined.append(
            MinedRecord(
                parent_id=record.id,
                node_path=node.path,
                name=f"{record.name}_s{index}",
                statement_text=goal if goal is not None
                else _placeholder_statement(record, node.path),
                proof=linearize(tree, node.path),
                origin=RecordOrigin.MINED_SUBPROOF,
                goal_text=goal,
            )
        )
    return mined


def mine_after_k(
    record: TheoremRecord, k: int, goals: Optional[GoalOracle] = None
) -> MinedRecord:
    """Mine the single state reached by descending ``k`` edges from the root
    along the unique-child chain. Raises KOutOfRange when the chain branches
    first or has no proof work left at depth ``k``.
    """
    _require_plain(record)
    if k < 1:
        raise KOutOfRange(f"k must be >= 1, got {k}")
    tree = build_tree(record.proof)
    node = tree.root
    for step in range(k):
        if len(node.children) != 1:
            kind = "branches" if node.children else "ends"
            raise KOutOfRange(
                f"{record.id}: proof {kind} after {step} step(s); cannot descend {k}"
            )
        node = node.children[0]
    if node.is_leaf():
        raise KOutOfRange(
            f"{record.id}: no tactics remain after {k} step(s); nothing to mine"
        )
    goal = goals.lookup(record.id, node.path) if goals else None
    return MinedRecord(
        parent_id=record.id,
        node_path=node.path,
        name=f"{record.name}_after_{k}",
        statement_text=goal if goal is not None
        else _placeholder_statement(record, node.path),
        proof=linearize(tree, node.path),
        origin=RecordOrigin.MINED_AFTER_K,
        goal_text=goal,
    )


def mined_to_record(mined: MinedRecord, parent: TheoremRecord) -> TheoremRecord:
    """Lift a MinedRecord into a corpus TheoremRecord under the parent's file.
    The id appends ``#node<path>`` to the parent id, keeping provenance."""
    path_str = ".".join(str(i) for i in mined.node_path)
    return TheoremRecord(
        id=f"{mined.parent_id}#node{path_str}",
        file=parent.file,
        name=mined.name,
        kind=parent.kind,
        statement_text=mined.statement_text,
        proof=mined.proof,
        origin=mined.origin,
        has_goal_selectors=False,
        line=parent.line,
    )
