"""Derivations ``|- alpha / rho  a`` and the transformations that bound N(a).

A derivation is a tree built from three rules:

* ``BASE``: any ``alpha``, ``rho`` for an agent whose root is labelled 0;
* ``RED``: from ``alpha - 1`` for the root-decremented agent and for every
  one-step reduct, conclude ``alpha`` (root label at least 1);
* ``CUT``: from ``alpha_l`` for ``a`` and ``alpha_r`` for ``b``, conclude
  ``alpha_l + alpha_r`` for ``a ._d b`` when ``d <= rho``.

Cut-free derivations at level 0 bound the longest reduction by ``alpha``.
:func:`recompose` builds a syntax-shaped derivation for any agent and the
cut-elimination passes turn it into a reduction-shaped one, which is how
:func:`certify` produces a checked certificate for the tower bound.

Derivations are shared DAGs: transformations memoize on node identity, so
the same sub-derivation is reused wherever the proofs reuse it.
"""

from __future__ import annotations

import itertools
import sys
import threading
import weakref
from typing import Callable

from . import powersum as ps
from .agents import Agent, agent, decrement_root, graft, parse_agent, reduction_steps, upper_bound
from .errors import OutOfHypothesis
from .tower import Tower

DEFAULT_NODE_LIMIT = 10**7

BASE, RED, CUT = "BASE", "RED", "CUT"


class DerivationTooLarge(RuntimeError):
    pass


class Derivation:
    """One rule application.  ``cut`` is ``(edge, left, right)`` for CUT nodes."""

    __slots__ = ("rule", "alpha", "rho", "subject", "premises", "cut", "__weakref__")

    def __init__(self, rule, alpha, rho, subject, premises=(), cut=None):
        self.rule = rule
        self.alpha = alpha
        self.rho = rho
        self.subject = subject
        self.premises = tuple(premises)
        self.cut = cut

    @property
    def conclusion(self):
        return self.alpha, self.rho, self.subject

    def __repr__(self):
        return f"<{self.rule} {ps.describe(self.alpha)}/{self.rho} {self.subject}>"


# -- context agents ---------------------------------------------------------------

class CtxNode:
    """An interned agent node that may also carry ``holes`` occurrences of x as children."""

    __slots__ = ("label", "children", "holes", "uid", "has_holes", "_empty", "_fills", "__weakref__")


_ctx_table: weakref.WeakValueDictionary = weakref.WeakValueDictionary()
_ctx_uids = itertools.count()


def ctx_node(label: int, children=(), holes: int = 0) -> CtxNode:
    children = tuple(sorted(children, key=lambda ec: (ec[0], ec[1].uid)))
    key = (label, tuple((e, c.uid) for e, c in children), holes)
    found = _ctx_table.get(key)
    if found is not None:
        return found
    node = CtxNode()
    node.label = label
    node.children = children
    node.holes = holes
    node.uid = next(_ctx_uids)
    node.has_holes = holes > 0 or any(c.has_holes for _, c in children)
    node._empty = None
    node._fills = {}
    _ctx_table[key] = node
    return node


def lift(a: Agent) -> CtxNode:
    """The hole-free context with the same shape as ``a``."""
    return ctx_node(a.label, [(e, lift(c)) for e, c in a.children])


def add_hole(c: CtxNode) -> CtxNode:
    return ctx_node(c.label, c.children, c.holes + 1)


def ctx_graft(c: CtxNode, e: int, child: CtxNode) -> CtxNode:
    return ctx_node(c.label, c.children + ((e, child),), c.holes)


def ctx_decrement(c: CtxNode) -> CtxNode:
    return ctx_node(c.label - 1, c.children, c.holes)


def ctx_empty(c: CtxNode) -> Agent:
    """``c(empty)``: drop every x together with its incoming edge."""
    if c._empty is None:
        c._empty = agent(c.label, [(e, ctx_empty(k)) for e, k in c.children])
    return c._empty


def ctx_fill(c: CtxNode, d: int, b: Agent) -> Agent:
    """``c(b)``: replace every x by ``b``, reached along an edge labelled ``d``."""
    if not c.has_holes:
        return ctx_empty(c)
    key = (d, b.uid)
    got = c._fills.get(key)
    if got is None:
        kids = [(e, ctx_fill(k, d, b)) for e, k in c.children] + [(d, b)] * c.holes
        got = c._fills[key] = agent(c.label, kids)
    return got


class ContextAgent:
    """A context ``a()`` whose holes are all reached along edges labelled ``x_type``."""

    __slots__ = ("root", "x_type")

    def __init__(self, root: CtxNode, x_type: int):
        self.root = root
        self.x_type = x_type

    @classmethod
    def hole_under(cls, a: Agent, d: int) -> ContextAgent:
        """``a ._d x``: a new hole as an extra child of the root of ``a``."""
        return cls(add_hole(lift(a)), d)

    def fill(self, b: Agent) -> Agent:
        return ctx_fill(self.root, self.x_type, b)

    def empty(self) -> Agent:
        return ctx_empty(self.root)

    def __repr__(self):
        return f"ContextAgent({_ctx_text(self.root)}, x_type={self.x_type})"


def _ctx_text(c: CtxNode) -> str:
    parts = sorted(f"{{{e}}}{_ctx_text(k)}" for e, k in c.children) + ["x"] * c.holes
    return f"{c.label}[" + ",".join(parts) + "]"


def parse_context(text: str, x_type: int) -> ContextAgent:
    """Parse an agent literal in which some children may be the bare symbol ``x``.

    ``x`` appears as ``{d}x``; every such ``d`` must equal ``x_type``.
    """
    if f"{{{x_type}}}x" not in text.replace(" ", ""):
        raise ValueError("context has no hole")
    probe = parse_agent(text.replace(" ", "").replace(f"{{{x_type}}}x", "{0}999999999[]"))
    if "x" in text.replace(" ", "").replace(f"{{{x_type}}}x", ""):
        raise ValueError(f"every hole must sit under an edge labelled {x_type}")

    def conv(a: Agent) -> CtxNode:
        holes = sum(1 for e, c in a.children if e == 0 and c.label == 999999999 and not c.children)
        kids = [(e, conv(c)) for e, c in a.children
                if not (e == 0 and c.label == 999999999 and not c.children)]
        return ctx_node(a.label, kids, holes)

    return ContextAgent(conv(probe), x_type)


# -- checking -------------------------------------------------------------------------

def _run_deep(fn: Callable, *args):
    """Run a deeply recursive function on a thread with a large stack."""
    result: dict = {}

    def target():
        old = sys.getrecursionlimit()
        sys.setrecursionlimit(max(old, 200_000))
        try:
            result["value"] = fn(*args)
        except BaseException as exc:  # re-raised on the calling thread
            result["error"] = exc
        finally:
            sys.setrecursionlimit(old)

    old_size = threading.stack_size()
    threading.stack_size(512 * 1024 * 1024)
    try:
        t = threading.Thread(target=target)
        t.start()
        t.join()
    finally:
        threading.stack_size(old_size)
    if "error" in result:
        raise result["error"]
    return result["value"]


def _local_fault(dv: Derivation) -> str | None:
    a = dv.subject
    if not isinstance(dv.rho, int) or dv.rho < 0 or ps.sign(dv.alpha) < 0:
        return "alpha and rho must be natural numbers"
    if any(p.rho != dv.rho for p in dv.premises):
        return "premise at a different rho"
    if dv.rule == BASE:
        if dv.premises:
            return "BASE takes no premises"
        if a.label != 0:
            return f"BASE needs root label 0, found {a.label}"
        return None
    if dv.rule == RED:
        if a.label < 1:
            return "RED needs a root label of at least 1"
        if ps.sign(dv.alpha) < 1:
            return "RED concludes alpha >= 1"
        below = ps.sub(dv.alpha, 1)
        if any(p.alpha != below for p in dv.premises):
            return "RED premises must carry alpha - 1"
        # premise order is free; a reduct is always larger than the decremented
        # agent, so the two kinds of premise never collide
        got = [p.subject for p in dv.premises]
        want = {decrement_root(a), *reduction_steps(a)}
        if decrement_root(a) not in got:
            return "RED is missing the root-decremented premise"
        if len(got) != len(set(got)) or set(got) != want:
            return f"RED premises cover {len(set(got)) - 1} reducts, expected exactly {len(want) - 1}"
        return None
    if dv.rule == CUT:
        if dv.cut is None or len(dv.premises) != 2:
            return "CUT needs a stored decomposition and two premises"
        e, left, right = dv.cut
        if (dv.premises[0].subject, dv.premises[1].subject) != (left, right):
            return "CUT premises do not match the stored decomposition"
        if graft(left, e, right) is not a:
            return "CUT decomposition does not rebuild the subject"
        if e > dv.rho:
            return f"CUT along edge {e} above rho {dv.rho}"
        if ps.add(dv.premises[0].alpha, dv.premises[1].alpha) != dv.alpha:
            return "CUT alpha is not the sum of its premises"
        return None
    return f"unknown rule {dv.rule!r}"


def explain(dv: Derivation) -> str | None:
    """``None`` when ``dv`` checks, otherwise a path to the first faulty node."""
    seen: set[int] = set()
    stack = [(dv, ())]
    while stack:
        node, path = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        fault = _local_fault(node)
        if fault is not None:
            where = "/".join(map(str, path)) or "root"
            return f"at {where} ({node.rule} {ps.describe(node.alpha)}/{node.rho} {node.subject}): {fault}"
        for k, p in enumerate(node.premises):
            stack.append((p, path + (k,)))
    return None


def check(dv: Derivation) -> bool:
    return explain(dv) is None


# -- measurements -------------------------------------------------------------------

def node_count(dv: Derivation) -> int:
    """Distinct nodes in the shared DAG."""
    seen = {id(dv)}
    stack = [dv]
    while stack:
        for p in stack.pop().premises:
            if id(p) not in seen:
                seen.add(id(p))
                stack.append(p)
    return len(seen)


def _fold(dv: Derivation, combine: Callable):
    """Bottom-up fold over the shared DAG, each node combined once after its premises."""
    memo: dict[int, object] = {}
    stack = [(dv, False)]
    while stack:
        node, ready = stack.pop()
        if id(node) in memo:
            continue
        if ready:
            memo[id(node)] = combine(node, [memo[id(p)] for p in node.premises])
            continue
        stack.append((node, True))
        stack.extend((p, False) for p in node.premises if id(p) not in memo)
    return memo[id(dv)]


def cut_count(dv: Derivation) -> int:
    """CUT rules in the tree that ``dv`` unfolds to (shared nodes counted per use)."""
    return _fold(dv, lambda n, sub: (n.rule == CUT) + sum(sub))


def max_cut_edge(dv: Derivation) -> int:
    """Highest CUT edge label, or -1 for a cut-free derivation."""
    return _fold(dv, lambda n, sub: max([n.cut[0] if n.rule == CUT else -1] + sub))


# -- transformations -------------------------------------------------------------

class Builder:
    """Creates derivation nodes under a node budget and holds the memo tables."""

    def __init__(self, node_limit: int = DEFAULT_NODE_LIMIT):
        self.node_limit = node_limit
        self.made = 0
        self._weaken: dict = {}
        self._sub: dict = {}
        self._null: dict = {}
        self._bsub: dict = {}
        self._ce: dict = {}
        self._bce: dict = {}
        self._cf: dict = {}

    def _new(self, *args, **kw) -> Derivation:
        self.made += 1
        if self.made > self.node_limit:
            raise DerivationTooLarge(f"derivation exceeds {self.node_limit} nodes")
        return Derivation(*args, **kw)

    def base(self, alpha, rho, a):
        return self._new(BASE, alpha, rho, a)

    def red(self, alpha, rho, a, premises):
        return self._new(RED, alpha, rho, a, premises)

    def cut(self, left: Derivation, e: int, right: Derivation):
        return self._new(CUT, ps.add(left.alpha, right.alpha), left.rho,
                         graft(left.subject, e, right.subject), (left, right),
                         (e, left.subject, right.subject))

    # raising alpha and rho keeps a derivation valid
    def weaken(self, dv: Derivation, alpha, rho=None) -> Derivation:
        rho = dv.rho if rho is None else rho
        if alpha == dv.alpha and rho == dv.rho:
            return dv
        if alpha < dv.alpha or rho < dv.rho:
            raise ValueError(f"cannot weaken {ps.describe(dv.alpha)}/{dv.rho} "
                             f"to {ps.describe(alpha)}/{rho}")
        key = (id(dv), alpha, rho)
        got = self._weaken.get(key)
        if got is not None:
            return got[1]
        if dv.rule == BASE:
            out = self.base(alpha, rho, dv.subject)
        elif dv.rule == RED:
            below = ps.sub(alpha, 1)
            out = self.red(alpha, rho, dv.subject, [self.weaken(p, below, rho) for p in dv.premises])
        else:
            left, right = dv.premises
            extra = ps.sub(alpha, dv.alpha)
            out = self.cut(self.weaken(left, ps.add(left.alpha, extra), rho), dv.cut[0],
                           self.weaken(right, right.alpha, rho))
        self._weaken[key] = (dv, out)  # keep dv alive so its id stays unique
        return out

    def base_prime(self, n: int, alpha_extra, rho: int) -> Derivation:
        """``|- (alpha_extra + n) / rho  n[]`` as a chain of RED nodes over BASE."""
        dv = self.base(alpha_extra, rho, agent(0))
        for k in range(1, n + 1):
            dv = self.red(ps.add(alpha_extra, k), rho, agent(k), [dv])
        return dv

    def recompose(self, a: Agent) -> Derivation:
        rho = a.depth

        def build(node: Agent) -> Derivation:
            dv = self.base_prime(node.label, 0, rho)
            for e, child in node.children:
                dv = self.cut(dv, e, build(child))
            return dv

        return self.weaken(build(a), a.max_label * a.size, rho)

    # Split a context along a CUT of its hole-free shape.
    @staticmethod
    def _split(c: CtxNode, dv: Derivation) -> tuple[CtxNode, CtxNode]:
        e, left, right = dv.cut
        for k, (ek, child) in enumerate(c.children):
            if ek == e and ctx_empty(child) is right:
                rest = c.children[:k] + c.children[k + 1:]
                c1 = ctx_node(c.label, rest, c.holes)
                assert ctx_empty(c1) is left
                return c1, child
        raise AssertionError("context does not match the CUT decomposition")

    def _routes(self, dv: Derivation, c: CtxNode, d: int, b: Agent, recurse, target):
        """Premises of the rebuilt RED for every reduct that comes from a real child."""
        by_subject = {p.subject: p for p in dv.premises[1:]}
        dc = ctx_decrement(c)
        routes: dict[Agent, Derivation] = {}
        for e, child in c.children:
            if e < 1:
                continue
            succ = ctx_graft(child, e - 1, dc)
            subj = ctx_fill(succ, d, b)
            if subj not in routes:
                routes[subj] = self.weaken(recurse(by_subject[ctx_empty(succ)], succ), target)
        return dc, routes

    def substitute(self, dva: Derivation, ctx: ContextAgent, dvb: Derivation) -> Derivation:
        """``alpha/rho a(empty)`` and ``beta/rho b`` give ``alpha(beta+1)/rho a(b)`` when ``d <= rho+1``."""
        d, b = ctx.x_type, dvb.subject
        if dva.rho != dvb.rho:
            raise ValueError("both derivations must share rho")
        if d > dva.rho + 1:
            raise ValueError(f"hole type {d} exceeds rho + 1 = {dva.rho + 1}")
        if ctx.empty() is not dva.subject:
            raise ValueError("derivation subject is not the emptied context")
        beta1 = ps.add(dvb.alpha, 1)

        def go(dv: Derivation, c: CtxNode) -> Derivation:
            key = (id(dv), c.uid, id(dvb), d)
            got = self._sub.get(key)
            if got is not None:
                return got[2]
            alpha = ps.mul(dv.alpha, beta1)
            if not c.has_holes:
                out = self.weaken(dv, alpha)
            elif dv.rule == BASE:
                out = self.base(alpha, dv.rho, ctx_fill(c, d, b))
            elif dv.rule == RED:
                target = ps.sub(alpha, 1)  # (alpha-1)(beta+1) + beta
                dc, routes = self._routes(dv, c, d, b, go, target)
                dec = go(dv.premises[0], dc)
                if c.holes and d >= 1:
                    subj = graft(b, d - 1, dec.subject)
                    if subj not in routes:
                        routes[subj] = self.cut(dvb, d - 1, dec)
                out = self.red(alpha, dv.rho, ctx_fill(c, d, b),
                               [self.weaken(dec, target)] + list(routes.values()))
            else:
                c1, c2 = self._split(c, dv)
                out = self.cut(go(dv.premises[0], c1), dv.cut[0], go(dv.premises[1], c2))
            self._sub[key] = (dv, c, out)
            return out

        return go(dva, ctx.root)

    def null_substitute(self, dva: Derivation, ctx: ContextAgent, b: Agent) -> Derivation:
        """A hole of type 0 can be filled with anything at no cost in alpha."""
        if ctx.x_type != 0:
            raise ValueError("null substitution needs a hole of type 0")
        if ctx.empty() is not dva.subject:
            raise ValueError("derivation subject is not the emptied context")

        def go(dv: Derivation, c: CtxNode) -> Derivation:
            if not c.has_holes:
                return dv
            key = (id(dv), c.uid, b.uid)
            got = self._null.get(key)
            if got is not None:
                return got[2]
            if dv.rule == BASE:
                out = self.base(dv.alpha, dv.rho, ctx_fill(c, 0, b))
            elif dv.rule == RED:
                target = ps.sub(dv.alpha, 1)
                dc, routes = self._routes(dv, c, 0, b, go, target)
                out = self.red(dv.alpha, dv.rho, ctx_fill(c, 0, b),
                               [go(dv.premises[0], dc)] + list(routes.values()))
            else:
                c1, c2 = self._split(c, dv)
                out = self.cut(go(dv.premises[0], c1), dv.cut[0], go(dv.premises[1], c2))
            self._null[key] = (dv, c, out)
            return out

        return go(dva, ctx.root)

    def base_substitute(self, dva: Derivation, ctx: ContextAgent, dvb: Derivation) -> Derivation:
        """At rho 0 a hole of type 1 costs only ``alpha + beta``."""
        d, b = ctx.x_type, dvb.subject
        if dva.rho != 0 or dvb.rho != 0:
            raise ValueError("base substitution works at rho = 0")
        if d != 1:
            raise ValueError("base substitution needs a hole of type 1")
        if ctx.empty() is not dva.subject:
            raise ValueError("derivation subject is not the emptied context")
        beta = dvb.alpha

        def go(dv: Derivation, c: CtxNode) -> Derivation:
            key = (id(dv), c.uid, id(dvb))
            got = self._bsub.get(key)
            if got is not None:
                return got[2]
            alpha = ps.add(dv.alpha, beta)
            if not c.has_holes:
                out = self.weaken(dv, alpha)
            elif dv.rule == BASE:
                out = self.base(alpha, 0, ctx_fill(c, 1, b))
            elif dv.rule == RED:
                target = ps.sub(alpha, 1)
                dc, routes = self._routes(dv, c, 1, b, go, target)
                dec = go(dv.premises[0], dc)
                if c.holes:
                    # b with the rest of the agent hanging off an inert edge
                    hang = self.null_substitute(dvb, ContextAgent.hole_under(b, 0), dec.subject)
                    routes.setdefault(hang.subject, self.weaken(hang, target))
                out = self.red(alpha, 0, ctx_fill(c, 1, b), [dec] + list(routes.values()))
            else:
                c1, c2 = self._split(c, dv)
                left = go(dv.premises[0], c1)
                right_subject = ctx_fill(c2, 1, b)
                joined = self.null_substitute(left, ContextAgent.hole_under(left.subject, 0),
                                              right_subject)
                out = self.weaken(joined, ps.add(dv.alpha, beta))
            self._bsub[key] = (dv, c, out)
            return out

        return go(dva, ctx.root)

    def cut_eliminate(self, dv: Derivation) -> Derivation:
        """Lower rho by one; alpha becomes 0 if it was 0 and ``2^(alpha-1)`` otherwise."""
        if dv.rho < 1:
            raise ValueError("cut elimination needs rho >= 1")
        rho = dv.rho - 1

        def go(node: Derivation) -> Derivation:
            got = self._ce.get(id(node))
            if got is not None:
                return got[1]
            alpha = ps.exp_step(node.alpha)
            if node.rule == BASE:
                out = self.base(alpha, rho, node.subject)
            elif node.rule == RED:
                target = ps.sub(alpha, 1)
                out = self.red(alpha, rho, node.subject,
                               [self.weaken(go(p), target) for p in node.premises])
            else:
                e = node.cut[0]
                left, right = go(node.premises[0]), go(node.premises[1])
                if e <= rho:
                    joined = self.cut(left, e, right)
                else:
                    joined = self.substitute(left, ContextAgent.hole_under(left.subject, e), right)
                out = self.weaken(joined, alpha)
            self._ce[id(node)] = (node, out)
            return out

        return go(dv)

    def base_cut_eliminate(self, dv: Derivation) -> Derivation:
        """From rho 1 to rho 0 at no cost in alpha."""
        if dv.rho != 1:
            raise ValueError("base cut elimination needs rho = 1")

        def go(node: Derivation) -> Derivation:
            got = self._bce.get(id(node))
            if got is not None:
                return got[1]
            if node.rule == BASE:
                out = self.base(node.alpha, 0, node.subject)
            elif node.rule == RED:
                out = self.red(node.alpha, 0, node.subject, [go(p) for p in node.premises])
            else:
                e = node.cut[0]
                left, right = go(node.premises[0]), go(node.premises[1])
                if e == 0:
                    out = self.cut(left, 0, right)
                else:
                    out = self.base_substitute(left, ContextAgent.hole_under(left.subject, 1), right)
            self._bce[id(node)] = (node, out)
            return out

        return go(dv)

    def cut_free(self, dv: Derivation) -> Derivation:
        """Remove the remaining edge-0 CUTs of a rho-0 derivation."""
        if dv.rho != 0:
            raise ValueError("only rho-0 derivations can be made cut-free this way")

        def go(node: Derivation) -> Derivation:
            got = self._cf.get(id(node))
            if got is not None:
                return got[1]
            if node.rule == BASE:
                out = node
            elif node.rule == RED:
                prem = [go(p) for p in node.premises]
                same = all(p is q for p, q in zip(prem, node.premises))
                out = node if same else self.red(node.alpha, 0, node.subject, prem)
            else:
                left = go(node.premises[0])
                joined = self.null_substitute(left, ContextAgent.hole_under(left.subject, 0),
                                              node.cut[2])
                out = self.weaken(joined, node.alpha)
            self._cf[id(node)] = (node, out)
            return out

        return go(dv)


# -- public API -------------------------------------------------------------------------

def _decrement_first(dv: Derivation) -> Derivation:
    """Copy of ``dv`` whose RED nodes list the root-decremented premise first.

    The checker accepts any premise order, while the transformations expect
    this one; derivations the builder made already have it and come back as is.
    """
    memo: dict[int, tuple[Derivation, Derivation]] = {}

    def go(node: Derivation) -> Derivation:
        hit = memo.get(id(node))
        if hit is not None:
            return hit[1]
        premises = [go(p) for p in node.premises]
        if node.rule == RED and premises:
            dec = decrement_root(node.subject)
            premises.sort(key=lambda p: p.subject is not dec)
        if all(x is y for x, y in zip(premises, node.premises)):
            out = node
        else:
            out = Derivation(node.rule, node.alpha, node.rho, node.subject, premises, node.cut)
        memo[id(node)] = (node, out)
        return out

    return go(dv)


def _with_builder(method: str, *args, node_limit: int = DEFAULT_NODE_LIMIT):
    b = Builder(node_limit)
    args = tuple(_run_deep(_decrement_first, x) if isinstance(x, Derivation) else x for x in args)
    return _run_deep(getattr(b, method), *args)


def weaken(dv: Derivation, alpha2, rho2: int, node_limit: int = DEFAULT_NODE_LIMIT) -> Derivation:
    return _with_builder("weaken", dv, alpha2, rho2, node_limit=node_limit)


def recompose(a: Agent, node_limit: int = DEFAULT_NODE_LIMIT) -> Derivation:
    """``|- max(a)|a| / depth(a)  a`` built from BASE', CUT and weakening."""
    return _with_builder("recompose", a, node_limit=node_limit)


def substitute(dva, ctx, dvb, node_limit: int = DEFAULT_NODE_LIMIT) -> Derivation:
    return _with_builder("substitute", dva, ctx, dvb, node_limit=node_limit)


def null_substitute(dva, ctx, b, node_limit: int = DEFAULT_NODE_LIMIT) -> Derivation:
    return _with_builder("null_substitute", dva, ctx, b, node_limit=node_limit)


def base_substitute(dva, ctx, dvb, node_limit: int = DEFAULT_NODE_LIMIT) -> Derivation:
    return _with_builder("base_substitute", dva, ctx, dvb, node_limit=node_limit)


def cut_eliminate(dv, node_limit: int = DEFAULT_NODE_LIMIT) -> Derivation:
    return _with_builder("cut_eliminate", dv, node_limit=node_limit)


def base_cut_eliminate(dv, node_limit: int = DEFAULT_NODE_LIMIT) -> Derivation:
    return _with_builder("base_cut_eliminate", dv, node_limit=node_limit)


def base_prime(n: int, alpha_extra=0, rho: int = 0) -> Derivation:
    return Builder().base_prime(n, alpha_extra, rho)


def make_cut_free(dv, node_limit: int = DEFAULT_NODE_LIMIT) -> Derivation:
    return _with_builder("cut_free", dv, node_limit=node_limit)


def extract_bound(dv: Derivation, node_limit: int = DEFAULT_NODE_LIMIT):
    """The alpha of a rho-0 derivation, after confirming it survives CUT removal."""
    if dv.rho != 0:
        raise ValueError("bounds are read off rho-0 derivations")
    free = make_cut_free(dv, node_limit=node_limit)
    if max_cut_edge(free) != -1 or free.alpha != dv.alpha:
        raise AssertionError("CUT removal did not produce a cut-free derivation")
    return free.alpha


def _pipeline(b: Builder, dv: Derivation, stages: list | None = None) -> Derivation:
    if stages is not None:
        stages.append(dv)
    while dv.rho > 1:
        dv = b.cut_eliminate(dv)
        if stages is not None:
            stages.append(dv)
    if dv.rho == 1:
        dv = b.base_cut_eliminate(dv)
        if stages is not None:
            stages.append(dv)
    return dv


def certify(a: Agent, node_limit: int = DEFAULT_NODE_LIMIT,
            stages: list | None = None) -> tuple[Tower, Derivation]:
    """Recompose, eliminate cuts down to rho 1, then the base pass.

    Returns the tower bound for ``a`` together with the rho-0 derivation; the
    derivation's own alpha is a (possibly different) certified bound on N(a).
    Pass a list as ``stages`` to collect every intermediate derivation, from
    the recomposed one to the final result.
    """
    bound = upper_bound(a)  # raises OutOfHypothesis like the bound itself
    b = Builder(node_limit)
    dv = _run_deep(lambda: _pipeline(b, b.recompose(a), stages))
    return bound, dv


def certify_atomic(n: int, p: int, d: int, node_limit: int = DEFAULT_NODE_LIMIT) -> Derivation:
    """Certificate for ``n[{d}p[]]``: substitute ``p[]`` into ``n[{d}x]`` at rho d-1, then eliminate."""
    if d < 2:
        raise OutOfHypothesis(f"depth must be at least 2, got {d}")
    b = Builder(node_limit)

    def run():
        dn = b.base_prime(n, 0, d - 1)
        dp = b.base_prime(p, 0, d - 1)
        start = b.substitute(dn, ContextAgent.hole_under(agent(n), d), dp)
        return _pipeline(b, start)

    return _run_deep(run)


def alpha_chain(start, steps: int):
    """``start`` pushed through ``steps`` cut eliminations."""
    for _ in range(steps):
        start = ps.exp_step(start)
    return start


# -- serialization -----------------------------------------------------------------

def dump(dv: Derivation, max_lines: int = 100_000) -> str:
    """Nested text: ``RULE alpha rho agent [@ d | left | right] {`` ... ``}``.

    Shared nodes are written out at every use, so the text is the tree the
    DAG unfolds to; ``max_lines`` guards against exponential output.
    """
    lines: list[str] = []
    stack: list = [(dv, 0)]
    while stack:
        node, depth = stack.pop()
        pad = "  " * depth
        if node is None:
            lines.append(pad + "}")
            continue
        if len(lines) >= max_lines:
            raise DerivationTooLarge(f"serialization exceeds {max_lines} lines")
        head = f"{pad}{node.rule} {ps.to_text(node.alpha)} {node.rho} {node.subject}"
        if node.rule == CUT:
            e, left, right = node.cut
            head += f" @ {e} | {left} | {right}"
        if node.premises:
            lines.append(head + " {")
            stack.append((None, depth))
            for p in reversed(node.premises):
                stack.append((p, depth + 1))
        else:
            lines.append(head)
    return "\n".join(lines) + "\n"


def load(text: str) -> Derivation:
    """Inverse of :func:`dump`."""
    root: list[Derivation] = []
    stack: list[tuple[list, list]] = []  # (header fields, premises so far)

    def build(fields, premises):
        rule, alpha, rho, subject, cut = fields
        return Derivation(rule, alpha, rho, subject, premises, cut)

    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line == "}":
            fields, premises = stack.pop()
            node = build(fields, premises)
            (stack[-1][1] if stack else root).append(node)
            continue
        opens = line.endswith("{")
        if opens:
            line = line[:-1].rstrip()
        head, _, cutpart = line.partition(" @ ")
        rule, alpha, rho, subject = head.split(" ", 3)
        cut = None
        if cutpart:
            e, left, right = (x.strip() for x in cutpart.split("|"))
            cut = (int(e), parse_agent(left), parse_agent(right))
        fields = [rule, ps.from_text(alpha), int(rho), parse_agent(subject), cut]
        if opens:
            stack.append((fields, []))
        else:
            (stack[-1][1] if stack else root).append(build(fields, []))
    if stack or len(root) != 1:
        raise ValueError("unbalanced derivation text")
    return root[0]
