"""Agents: finite trees with natural node and edge labels, and their rewriting.

An agent ``n[{d_1}a_1, ..., {d_p}a_p]`` rewrites non-deterministically to
``a_i ._{d_i - 1} (n-1)[{d_1}a_1, ..., {d_p}a_p]`` for any child with
``d_i >= 1``, provided ``n >= 1``.  ``a ._d b`` (``graft``) appends ``b`` as a new
child of the root of ``a`` along an edge labelled ``d``.

Agents are hash-consed: structurally equal trees (up to permutation of
children) are the same Python object, so equality and hashing are O(1) and
memo tables stay small even though agents grow quickly under rewriting.
"""

from __future__ import annotations

import itertools
import random
import re
import weakref
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .errors import BudgetExceeded, OutOfHypothesis
from .tower import Tower

DEFAULT_AGENT_BUDGET = 10**7


class AgentParseError(ValueError):
    def __init__(self, message: str, text: str, pos: int):
        super().__init__(f"{message} at position {pos}: {text[:pos]}<!>{text[pos:]}")
        self.pos = pos


class Agent:
    """An interned agent.  Build with :func:`agent`, never directly."""

    __slots__ = (
        "label", "children", "uid", "size", "max_label", "depth",
        "_core", "_text", "__weakref__",
    )

    label: int
    children: tuple[tuple[int, Agent], ...]

    def __repr__(self):
        return f"agent({str(self)!r})"

    def __str__(self):
        return format_agent(self)

    def __reduce__(self):
        return (parse_agent, (str(self),))


_table: weakref.WeakValueDictionary = weakref.WeakValueDictionary()
_uids = itertools.count()


def _edge_key(edge: tuple[int, Agent]) -> tuple[int, int]:
    return edge[0], edge[1].uid


def agent(label: int, children: Iterable[tuple[int, Agent]] = ()) -> Agent:
    """Return the canonical agent ``label[{d}child, ...]``."""
    children = tuple(sorted(children, key=_edge_key))
    key = (label, tuple((d, c.uid) for d, c in children))
    found = _table.get(key)
    if found is not None:
        return found
    if label < 0 or any(d < 0 for d, _ in children):
        raise ValueError("agent labels must be natural numbers")
    a = Agent()
    a.label = label
    a.children = children
    a.uid = next(_uids)
    a.size = 1 + sum(c.size for _, c in children)
    a.max_label = max([label] + [c.max_label for _, c in children])
    a.depth = max([0] + [max(d, c.depth) for d, c in children])
    a._core = None
    a._text = None
    _table[key] = a
    return a


def leaf(label: int) -> Agent:
    return agent(label)


def _postorder(root: Agent) -> Iterator[Agent]:
    """Distinct nodes below ``root``, children before parents."""
    seen = set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            yield node
            continue
        if node.uid in seen:
            continue
        seen.add(node.uid)
        stack.append((node, True))
        for _, c in node.children:
            if c.uid not in seen:
                stack.append((c, False))


# -- text format --------------------------------------------------------------

def format_agent(a: Agent) -> str:
    """Serialize as ``n[{d}child,...]`` with children in canonical text order."""
    if a._text is None:
        for node in _postorder(a):
            if node._text is None:
                parts = sorted((d, c._text) for d, c in node.children)
                node._text = f"{node.label}[" + ",".join(f"{{{d}}}{t}" for d, t in parts) + "]"
    return a._text


_TOKEN = re.compile(r"\s*(?:(\d+)|(\S))")


def parse_agent(text: str) -> Agent:
    """Parse ``Agent ::= NAT "[" (Edge ("," Edge)*)? "]"``, ``Edge ::= "{" NAT "}" Agent``."""
    tokens = []
    for m in _TOKEN.finditer(text):
        if m.group(1) is not None:
            tokens.append(("nat", int(m.group(1)), m.start(1)))
        elif m.group(2) is not None:
            tokens.append((m.group(2), None, m.start(2)))
    tokens.append(("end", None, len(text)))
    pos = 0

    def expect(kind):
        nonlocal pos
        tok = tokens[pos]
        if tok[0] != kind:
            want = {"nat": "a natural number", "end": "end of input"}.get(kind, repr(kind))
            got = "end of input" if tok[0] == "end" else repr(tok[1] if tok[0] == "nat" else tok[0])
            raise AgentParseError(f"expected {want}, found {got}", text, tok[2])
        pos += 1
        return tok[1]

    # iterative to cope with deep literals
    stack: list[tuple[int, list]] = []
    label = expect("nat")
    expect("[")
    stack.append((label, []))
    while True:
        kind = tokens[pos][0]
        label, kids = stack[-1]
        if kind == "]":
            pos += 1
            done = agent(label, kids)
            stack.pop()
            if not stack:
                break
            stack[-1][1][-1] = (stack[-1][1][-1], done)
            if tokens[pos][0] == ",":
                pos += 1
                if tokens[pos][0] != "{":
                    expect("{")
            elif tokens[pos][0] != "]":
                expect("]")
            continue
        if kind == "{":
            pos += 1
            d = expect("nat")
            expect("}")
            kids.append(d)  # placeholder, filled when the child closes
            child_label = expect("nat")
            expect("[")
            stack.append((child_label, []))
            continue
        expect("]")
    expect("end")
    return done


# -- structure ----------------------------------------------------------------

def graft(a: Agent, d: int, b: Agent) -> Agent:
    """``a ._d b``: add ``b`` as a child of the root of ``a`` along an edge labelled ``d``."""
    return agent(a.label, a.children + ((d, b),))


def decrement_root(a: Agent) -> Agent:
    if a.label == 0:
        raise ValueError("cannot decrement a root labelled 0")
    return agent(a.label - 1, a.children)


def reduction_steps(a: Agent) -> list[Agent]:
    """All one-step reducts of ``a``, deduplicated, in child order."""
    if a.label == 0:
        return []
    dec = agent(a.label - 1, a.children)
    out: dict[Agent, None] = {}
    for d, child in a.children:
        if d >= 1:
            out[graft(child, d - 1, dec)] = None
    return list(out)


def inert_core(a: Agent) -> Agent:
    """Drop every subtree hanging from an edge labelled 0.

    Such subtrees can never be selected by the rewrite rule and edge labels
    never change, so they are carried along untouched forever; ``a`` and
    ``inert_core(a)`` have the same longest reduction length.
    """
    if a._core is None:
        for node in _core_pending(a):
            if node._core is None:
                node._core = agent(node.label, [(d, c._core) for d, c in node.children if d > 0])
    return a._core


def _core_pending(root: Agent) -> Iterator[Agent]:
    """Like :func:`_postorder` but never descends below a node whose core is known."""
    seen = set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            yield node
            continue
        if node.uid in seen or node._core is not None:
            continue
        seen.add(node.uid)
        stack.append((node, True))
        for d, c in node.children:
            if d > 0 and c._core is None and c.uid not in seen:
                stack.append((c, False))


def _core_steps(a: Agent) -> list[Agent]:
    """Cores of the reducts of a core agent ``a``.

    Everything involved is already inert-free, so a graft along edge 0 is
    simply dropped and any other graft is its own core.
    """
    if a.label == 0:
        return []
    dec = agent(a.label - 1, a.children)
    dec._core = dec
    out: dict[Agent, None] = {}
    for d, child in a.children:
        if d == 1:
            out[child] = None
        elif d > 1:
            g = graft(child, d - 1, dec)
            g._core = g
            out[g] = None
    return list(out)


def agent_metrics(a: Agent) -> tuple[int, int, int]:
    """``(|a|, max(a), depth(a))``: node count, highest node label, highest edge label."""
    return a.size, a.max_label, a.depth


def permuted(a: Agent, rng: random.Random) -> list:
    """A nested-list literal of ``a`` with children shuffled; re-parsing yields ``a``."""
    kids = [(d, permuted(c, rng)) for d, c in a.children]
    rng.shuffle(kids)
    return [a.label, kids]


def from_nested(lit: Sequence) -> Agent:
    label, kids = lit
    return agent(label, [(d, from_nested(c)) for d, c in kids])


# -- search ---------------------------------------------------------------------

@dataclass
class ReductionStats:
    longest: int
    explored: int
    witness: list[Agent] | None = field(default=None, repr=False)


def longest_reduction(
    a: Agent,
    budget: int = DEFAULT_AGENT_BUDGET,
    witness: bool = False,
    quotient: bool = True,
) -> ReductionStats:
    """Length of the longest reduction sequence from ``a``.

    Memoized depth-first search over canonical agents.  With ``quotient``
    (the default) states are keyed on :func:`inert_core`, which leaves the
    result unchanged and shrinks the state space by orders of magnitude.

    ``witness`` rebuilds one maximal sequence from the memo table.  It lists
    the reducts ``[a_1, ..., a_N]`` after the start agent, so it has exactly
    ``longest`` entries, ``a_1`` is a reduct of ``a`` and each entry reduces to
    the next.
    """
    key = inert_core if quotient else (lambda x: x)
    steps = _core_steps if quotient else reduction_steps
    memo: dict[Agent, int] = {}
    start = key(a)
    stack = [(start, iter(steps(start)), -1)]
    while stack:
        node, succ, best = stack[-1]
        for s in succ:
            n = memo.get(s)
            if n is None:
                stack[-1] = (node, succ, best)
                stack.append((s, iter(steps(s)), -1))
                break
            if n > best:
                best = n
        else:
            stack.pop()
            memo[node] = best + 1
            if len(memo) > budget:
                raise BudgetExceeded(
                    f"explored more than {budget} distinct agents", explored=len(memo))
            if stack:
                parent, psucc, pbest = stack[-1]
                if best + 1 > pbest:
                    stack[-1] = (parent, psucc, best + 1)
    longest = memo[start]
    path = None
    if witness:
        path = []
        cur = a
        while memo[key(cur)] > 0:
            want = memo[key(cur)] - 1
            cur = next(s for s in reduction_steps(cur) if memo.get(key(s)) == want)
            path.append(cur)
    return ReductionStats(longest=longest, explored=len(memo), witness=path)


def atomic_pair(n: int, p: int, d: int) -> Agent:
    """``n[{d}p[]]``, the agent for an interaction between atomic agents n and p at depth d."""
    return agent(n, [(d, agent(p))])


def nd_via_agents(n: int, p: int, d: int, budget: int = DEFAULT_AGENT_BUDGET) -> int:
    """``N(n[{d}p[]]) + 1``: the maximal interaction length, counting the initial move."""
    if d < 2:
        raise OutOfHypothesis(f"depth must be at least 2, got {d}")
    return longest_reduction(atomic_pair(n, p, d), budget=budget).longest + 1


# -- bounds -----------------------------------------------------------------------

def upper_bound(a: Agent) -> Tower:
    """``2_{depth(a)-1}^{max(a)|a| - 1}``; requires ``depth(a) >= 1`` and ``max(a) >= 1``."""
    size, mx, depth = agent_metrics(a)
    if depth < 1 or mx < 1:
        raise OutOfHypothesis(
            f"bound needs depth >= 1 and max label >= 1 (got depth {depth}, max {mx})")
    return Tower(depth - 1, mx * size - 1)


def atomic_upper_bound(n: int, p: int, d: int, variant: str = "plain") -> Tower:
    """Upper bound on the interaction length ``N_d(n, p)``.

    ``variant="plain"`` is ``2_{d-2}^{n(p+1)}`` and ``variant="sharp"`` is
    ``2_{d-2}^{n(p+1)-1}``, one step tighter at the top of the tower.
    """
    if d < 2:
        raise OutOfHypothesis(f"depth must be at least 2, got {d}")
    top = n * (p + 1)
    if variant == "sharp":
        if top < 1:
            raise OutOfHypothesis("sharp variant needs n(p+1) >= 1")
        top -= 1
    elif variant != "plain":
        raise ValueError(f"unknown variant {variant!r}")
    return Tower(d - 2, top)


def sandwich(n: int, p: int, d: int) -> tuple[Tower, Tower]:
    """``(2_{d-2}^2, 2_{d-2}^{n(p+1)})`` for ``3 <= d <= min(n - 1, p)``."""
    if not 3 <= d <= min(n - 1, p):
        raise OutOfHypothesis(f"need 3 <= d <= min(n-1, p), got n={n} p={p} d={d}")
    return Tower(d - 2, 2), Tower(d - 2, n * (p + 1))


def collapse_depth(n: int, p: int) -> int:
    """Deepest pointer chain two agents of sizes n and p can both see: ``min(2n, 2p+1)``."""
    return min(2 * n, 2 * p + 1)


# -- the depth-3 conjecture ---------------------------------------------------------

def _geometric(n: int, p: int) -> int:
    # (p^n - 1) / (p - 1) = 1 + p + ... + p^(n-1)
    return sum(p**k for k in range(n))


def conjecture_product(n: int, p: int) -> int:
    """Reading ``2 (p^n - 1)/(p - 1) + 1``."""
    return 2 * _geometric(n, p) + 1


def conjecture_power_matches(n: int, p: int, value: int) -> bool:
    """Whether ``value == 2^((p^n - 1)/(p - 1)) + 1``, without expanding the power."""
    e = _geometric(n, p)
    v = value - 1
    return v > 0 and v & (v - 1) == 0 and v.bit_length() - 1 == e


READINGS = ("product", "power")


@dataclass
class ConjectureRow:
    n: int
    p: int
    value: int
    explored: int
    product: bool
    power: bool


def conjecture_sweep(max_sum: int, budget: int = DEFAULT_AGENT_BUDGET) -> list[ConjectureRow]:
    """Exhaustive ``N_3(n, p)`` for ``n >= 1``, ``p >= 2``, ``n + p <= max_sum``."""
    rows = []
    for total in range(3, max_sum + 1):
        for n in range(1, total - 1):
            p = total - n
            stats = longest_reduction(atomic_pair(n, p, 3), budget=budget)
            value = stats.longest + 1
            rows.append(ConjectureRow(
                n, p, value, stats.explored,
                product=value == conjecture_product(n, p),
                power=conjecture_power_matches(n, p, value),
            ))
    return rows


def surviving_readings(rows: Sequence[ConjectureRow]) -> list[str]:
    return [r for r in READINGS if rows and all(getattr(row, r) for row in rows)]


# -- corpora ------------------------------------------------------------------------

def random_agent(rng: random.Random, max_size: int = 6, max_label: int = 3,
                 max_edge: int = 4) -> Agent:
    """A random agent with at most ``max_size`` nodes, uniform labels and random shape."""
    size = rng.randint(1, max_size)
    parents = [None] + [rng.randrange(i) for i in range(1, size)]
    labels = [rng.randint(0, max_label) for _ in range(size)]
    edges = [None] + [rng.randint(0, max_edge) for _ in range(1, size)]
    built: list[Agent | None] = [None] * size
    for i in reversed(range(size)):
        kids = [(edges[j], built[j]) for j in range(i + 1, size) if parents[j] == i]
        built[i] = agent(labels[i], kids)
    return built[0]
