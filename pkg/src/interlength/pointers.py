"""Visible pointer structures on the pure arenas ``I_d``.

A play is stored as its justifier list: move ``k`` is an Opponent move when
``k`` is even and a Player move when ``k`` is odd, move 0 is the unique
initial move and every later move points to an earlier move of the other
polarity.  Views, residual sizes and contexts are computed from that list.

The module also holds the exhaustive interaction enumerator, an oracle for
``N_d(n, p)`` that is independent of the agent rewriting system, and the
map from play steps to agent reductions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

from .agents import Agent, agent, decrement_root, graft
from .errors import BudgetExceeded

DEFAULT_PLAY_LEN = 1 << 16
DEFAULT_PLAY_BUDGET = 10**7


class PlayError(ValueError):
    pass


def is_opponent(k: int) -> bool:
    return k % 2 == 0


class Play:
    """An alternating justified sequence with its P-views and O-views precomputed."""

    def __init__(self, justifiers: Sequence[int | None]):
        just = tuple(justifiers)
        if not just:
            raise PlayError("a play has at least the initial move")
        if just[0] is not None:
            raise PlayError("move 0 is the initial Opponent move and has no justifier")
        for k, j in enumerate(just[1:], 1):
            if j is None:
                raise PlayError(f"move {k} needs a justifier (only move 0 is initial)")
            if not 0 <= j < k:
                raise PlayError(f"move {k} points to {j}, which is not earlier")
            if (k - j) % 2 == 0:
                raise PlayError(f"move {k} points to {j}, a move of the same polarity")
        self.just = just
        pv: list[tuple[int, ...]] = []
        ov: list[tuple[int, ...]] = []
        depth: list[int] = []
        for k, j in enumerate(just):
            if k == 0:
                pv.append((0,))
                ov.append((0,))
                depth.append(0)
                continue
            if is_opponent(k):
                pv.append(pv[j] + (k,))
                ov.append(ov[k - 1] + (k,))
            else:
                pv.append(pv[k - 1] + (k,))
                ov.append(ov[j] + (k,))
            depth.append(depth[j] + 1)
        self._pv = pv
        self._ov = ov
        self._depth = depth

    def __len__(self):
        return len(self.just)

    def __eq__(self, other):
        return isinstance(other, Play) and other.just == self.just

    def __hash__(self):
        return hash(self.just)

    def __repr__(self):
        return f"Play({format_play(self)!r})"

    def prefix(self, k: int) -> Play:
        """The play made of moves ``0..k``."""
        return Play(self.just[:k + 1])

    # views -----------------------------------------------------------------

    def pview(self, upto: int) -> list[int]:
        """P-view of the prefix ending at ``upto`` (indices, ending at ``upto``)."""
        return list(self._pv[upto])

    def oview(self, upto: int) -> list[int]:
        """O-view of the prefix ending at ``upto``; no special case for the initial move."""
        return list(self._ov[upto])

    def depth_of(self, k: int) -> int:
        """Length of the justifier chain from move ``k`` down to move 0."""
        return self._depth[k]

    def depth(self) -> int:
        """The smallest ``d`` such that the play lives on ``I_d``."""
        return max(self._depth)

    def is_visible(self) -> bool:
        for k in range(1, len(self)):
            view = self._pv[k - 1] if not is_opponent(k) else self._ov[k - 1]
            if self.just[k] not in view:
                return False
        return True

    # residual quantities -----------------------------------------------------

    def _own_view(self, i: int):
        return self._pv if is_opponent(i) else self._ov

    def _other_view(self, i: int):
        return self._ov if is_opponent(i) else self._pv

    def _residual(self, i: int, views, same_polarity: bool) -> int:
        base = len(views[i])
        best = 0
        for j in range(i, len(self)):
            if ((j - i) % 2 == 0) != same_polarity:
                continue
            if i in views[j]:
                best = max(best, len(views[j]) - base + 1)
        return best

    def rsize(self, i: int) -> int:
        """Residual size at ``i``.

        For an Opponent move: the longest P-view, measured from ``i``, over the
        Player moves whose P-view passes through ``i``.  Dually for a Player
        move with O-views over later Opponent moves.  0 when no move qualifies.
        """
        return self._residual(i, self._own_view(i), same_polarity=False)

    def rcosize(self, i: int) -> int:
        """Residual co-size at ``i``: the same over moves of ``i``'s own polarity
        (``i`` itself included), using O-views at an Opponent move and P-views at
        a Player move."""
        return self._residual(i, self._other_view(i), same_polarity=True)

    def residual_depth(self, i: int) -> int:
        """Longest pointer chain hanging below ``i`` (0 when nothing points into it)."""
        best = 0
        for j in range(i + 1, len(self)):
            k, steps = j, 0
            while k is not None and k > i:
                k = self.just[k]
                steps += 1
            if k == i:
                best = max(best, steps)
        return best

    # contexts ---------------------------------------------------------------------

    def context(self, i: int) -> list[int]:
        """Moves of ``i``'s polarity, other than ``i``, that the next move may point to.

        Ordered innermost first (latest in the view first).
        """
        view = self._own_view(i)[i][:-1]
        return [m for m in reversed(view) if (m - i) % 2 == 0]

    def cocontext(self, i: int) -> list[int]:
        """Moves of the other polarity visible to the player who owns ``i``."""
        view = self._other_view(i)[i][:-1]
        return [m for m in reversed(view) if (m - i) % 2 == 1]


# text format ------------------------------------------------------------------------

def format_play(s: Play) -> str:
    out = []
    for k, j in enumerate(s.just):
        pol = "O" if is_opponent(k) else "P"
        out.append(f"{pol}@{'-' if j is None else j}")
    return " ".join(out)


def parse_play(text: str) -> Play:
    just: list[int | None] = []
    for k, tok in enumerate(text.split()):
        pol, at, target = tok.partition("@")
        if not at or pol not in ("O", "P"):
            raise PlayError(f"bad move token {tok!r}")
        if (pol == "O") != is_opponent(k):
            raise PlayError(f"move {k} should be {'O' if is_opponent(k) else 'P'}, got {pol}")
        just.append(None if target == "-" else int(target))
    return Play(just)


# membership -----------------------------------------------------------------------

def _match(members: Sequence[int], children, ok) -> bool:
    """Perfect matching between context members and children under ``ok``."""
    if len(members) != len(children):
        return False
    owner: dict[int, int] = {}  # child index -> member index

    def augment(m: int, seen: set) -> bool:
        for c in range(len(children)):
            if c in seen or not ok(members[m], children[c]):
                continue
            seen.add(c)
            if c not in owner or augment(owner[c], seen):
                owner[c] = m
                return True
        return False

    return all(augment(m, set()) for m in range(len(members)))


class Membership:
    """Memoized trace / co-trace tests for one play."""

    def __init__(self, s: Play):
        self.s = s
        self._rsize = {}
        self._rcosize = {}
        self._rdepth = {}
        self._trace = {}
        self._cotrace = {}

    def rsize(self, i):
        if i not in self._rsize:
            self._rsize[i] = self.s.rsize(i)
        return self._rsize[i]

    def rcosize(self, i):
        if i not in self._rcosize:
            self._rcosize[i] = self.s.rcosize(i)
        return self._rcosize[i]

    def rdepth(self, i):
        if i not in self._rdepth:
            self._rdepth[i] = self.s.residual_depth(i)
        return self._rdepth[i]

    def trace(self, i: int, a: Agent) -> bool:
        key = (i, a)
        if key not in self._trace:
            self._trace[key] = self.rsize(i) <= 2 * a.label and _match(
                self.s.context(i), a.children, self._child_ok)
        return self._trace[key]

    def cotrace(self, i: int, a: Agent) -> bool:
        key = (i, a)
        if key not in self._cotrace:
            self._cotrace[key] = self.rcosize(i) <= 2 * a.label + 1 and _match(
                self.s.cocontext(i), a.children, self._child_ok)
        return self._cotrace[key]

    def _child_ok(self, m: int, edge_child) -> bool:
        d, child = edge_child
        return self.rdepth(m) <= d and self.cotrace(m, child)

    def interaction(self, i: int, a: Agent, d: int, b: Agent) -> bool:
        """``(s, i)`` lies in ``a *_d b``."""
        return self.rdepth(i) <= d and self.trace(i, a) and self.cotrace(i, b)


def is_trace(s: Play, i: int, a: Agent) -> bool:
    return Membership(s).trace(i, a)


def is_cotrace(s: Play, i: int, a: Agent) -> bool:
    return Membership(s).cotrace(i, a)


def in_interaction(s: Play, i: int, a: Agent, d: int, b: Agent) -> bool:
    return Membership(s).interaction(i, a, d, b)


def atomic_interaction(s: Play, n: int, p: int, d: int) -> bool:
    """Direct test of ``s in n *_d p``: P-views at P-moves within ``2n``, O-views at
    O-moves within ``2p + 1``, depth within ``d``, both players pointing in view."""
    if not s.is_visible() or s.depth() > d:
        return False
    for k in range(len(s)):
        if is_opponent(k):
            if len(s.oview(k)) > 2 * p + 1:
                return False
        elif len(s.pview(k)) > 2 * n:
            return False
    return True


# enumeration ------------------------------------------------------------------------

@dataclass
class EnumerationStats:
    max_length: int
    count: int


def iter_interactions(n: int, p: int, d: int, max_len: int = DEFAULT_PLAY_LEN,
                      budget: int = DEFAULT_PLAY_BUDGET) -> Iterator[tuple[int | None, ...]]:
    """Every play of ``n *_d p`` as a justifier tuple, each prefix before its extensions.

    Depth-first; a Player move must keep its P-view within ``2n`` and an
    Opponent move its O-view within ``2p + 1``, both must point inside the
    current view, and no justifier chain may exceed ``d`` pointers.
    """
    if d < 2:
        raise ValueError(f"depth must be at least 2, got {d}")
    # state: justifiers, P-view and O-view per move, depth per move
    stack = [((None,), ((0,),), ((0,),), (0,))]
    seen = 0
    while stack:
        just, pv, ov, dp = stack.pop()
        seen += 1
        if seen > budget:
            raise BudgetExceeded(f"more than {budget} plays enumerated", explored=seen)
        yield just
        k = len(just)
        if k >= max_len:
            raise BudgetExceeded(f"a play reached the length cap {max_len}", explored=seen)
        ext = []
        if k % 2 == 1:  # Player to move, pointing into its P-view at an Opponent move
            view = pv[k - 1] + (k,)
            if len(view) <= 2 * n:
                for j in pv[k - 1]:
                    if j % 2 == 0 and dp[j] < d:
                        ext.append((just + (j,), pv + (view,), ov + (ov[j] + (k,),), dp + (dp[j] + 1,)))
        else:
            view = ov[k - 1] + (k,)
            if len(view) <= 2 * p + 1:
                for j in ov[k - 1]:
                    if j % 2 == 1 and dp[j] < d:
                        ext.append((just + (j,), pv + (pv[j] + (k,),), ov + (view,), dp + (dp[j] + 1,)))
        stack.extend(reversed(ext))


def enumerate_interactions(n: int, p: int, d: int, max_len: int = DEFAULT_PLAY_LEN,
                           budget: int = DEFAULT_PLAY_BUDGET) -> EnumerationStats:
    """``(max |s|, number of plays)`` over ``s in n *_d p``."""
    best = count = 0
    for just in iter_interactions(n, p, d, max_len, budget):
        count += 1
        best = max(best, len(just))
    return EnumerationStats(best, count)


def maximal_interactions(n: int, p: int, d: int, **kw) -> Iterator[Play]:
    """Plays of ``n *_d p`` that admit no extension."""
    pending = None
    for just in iter_interactions(n, p, d, **kw):
        if pending is not None and not (len(just) == len(pending) + 1 and just[:-1] == pending):
            yield Play(pending)
        pending = just
    if pending is not None:
        yield Play(pending)


# simulation ---------------------------------------------------------------------------

class SimulationError(RuntimeError):
    pass


def simulate_step(s: Play, i: int, a: Agent, d: int, b: Agent,
                  membership: Membership | None = None) -> tuple[Agent, int, Agent]:
    """The reduction ``(a, d, b) ~> (a', d', b')`` that accounts for move ``i + 1``.

    If move ``i + 1`` points to move ``i`` the argument ``b`` comes to the
    head; otherwise it points into the context and the matching child of
    ``a`` does.  The result satisfies ``(s, i + 1) in a' *_d' b'``.
    """
    mem = membership or Membership(s)
    if i + 1 >= len(s):
        raise SimulationError(f"no move after {i}")
    if not mem.interaction(i, a, d, b):
        raise SimulationError(f"(s, {i}) is not in {a} *_{d} {b}")
    if a.label < 1:
        raise SimulationError("head agent has no size left")
    rest = graft(decrement_root(a), d, b)
    if s.just[i + 1] == i:
        if d < 1:
            raise SimulationError("argument called at depth 0")
        out = (b, d - 1, rest)
        if mem.interaction(i + 1, *out):
            return out
        raise SimulationError(f"argument call at move {i + 1} fails the membership check")
    for e, child in a.children:
        if e >= 1:
            out = (child, e - 1, rest)
            if mem.interaction(i + 1, *out):
                return out
    raise SimulationError(f"no child of {a} accounts for move {i + 1}")


def simulate_play(s: Play, n: int, d: int, p: int) -> list[tuple[Agent, int, Agent]]:
    """Run :func:`simulate_step` along the whole play from ``(n[], d, p[])``."""
    mem = Membership(s)
    triple = (agent(n), d, agent(p))
    out = [triple]
    for i in range(len(s) - 1):
        triple = simulate_step(s, i, *triple, membership=mem)
        out.append(triple)
    return out
