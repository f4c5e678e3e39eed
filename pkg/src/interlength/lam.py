"""Simply typed lambda terms over one base type, and head linear reduction.

Head linear reduction replaces only the head occurrence of a variable by
the argument its binder is paired with, leaving every redex in place.  The
pairing is found by walking the spine from the root with a stack of pending
arguments, so a binder separated from its argument by other binders and
applications still forms a (generalized) redex with it.

Two interpreters count steps: :func:`hlr_run` rewrites terms (slow, but it
exposes every intermediate term) and :func:`kam_steps` runs a Krivine
machine, where each variable lookup that finds a closure is one step.  They
agree step for step, and the machine is what makes Church-numeral towers
with tens of thousands of steps practical.
"""

from __future__ import annotations

import itertools
import random
import re
from dataclasses import dataclass, field
from typing import Iterator

from .errors import BudgetExceeded, OutOfHypothesis
from .tower import Tower

DEFAULT_STEP_BUDGET = 10**7


# -- types ---------------------------------------------------------------------

@dataclass(frozen=True)
class Base:
    def __str__(self):
        return "o"


@dataclass(frozen=True)
class Arrow:
    dom: "SimpleType"
    cod: "SimpleType"

    def __str__(self):
        left = f"({self.dom})" if isinstance(self.dom, Arrow) else str(self.dom)
        return f"{left} -> {self.cod}"


SimpleType = Base | Arrow
BOT = Base()


def arrows(*types: SimpleType) -> SimpleType:
    """``arrows(A, B, C) = A -> B -> C``."""
    out = types[-1]
    for t in reversed(types[:-1]):
        out = Arrow(t, out)
    return out


def level(t: SimpleType) -> int:
    """``lv(o) = 0`` and ``lv(A -> B) = max(lv A + 1, lv B)``."""
    lv = 0
    while isinstance(t, Arrow):
        lv = max(lv, level(t.dom) + 1)
        t = t.cod
    return lv


def church_type(k: int) -> SimpleType:
    """``A_0 = o`` and ``A_{k+1} = A_k -> A_k``."""
    t: SimpleType = BOT
    for _ in range(k):
        t = Arrow(t, t)
    return t


def split_arrows(t: SimpleType) -> tuple[list[SimpleType], SimpleType]:
    args = []
    while isinstance(t, Arrow):
        args.append(t.dom)
        t = t.cod
    return args, t


# -- terms -----------------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    """A free symbol: base constants, the redex-delaying symbols, and so on."""
    name: str
    type: SimpleType = BOT


@dataclass(frozen=True)
class Lam:
    var: str
    vtype: SimpleType
    body: "Term"


@dataclass(frozen=True)
class App:
    fun: "Term"
    arg: "Term"


Term = Var | Const | Lam | App


def apps(head: Term, *args: Term) -> Term:
    for a in args:
        head = App(head, a)
    return head


def spine(t: Term) -> tuple[Term, list[Term]]:
    """``h u1 ... uk`` as ``(h, [u1, ..., uk])``."""
    args = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fun
    return t, args[::-1]


def format_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Const):
        return t.name
    if isinstance(t, Lam):
        return f"\\{t.var}:{t.vtype}. {format_term(t.body)}"
    head, args = spine(t)
    parts = [_atom(head)] + [_atom(a) for a in args]
    return " ".join(parts)


def _atom(t: Term) -> str:
    s = format_term(t)
    return s if isinstance(t, (Var, Const)) else f"({s})"


def size(t: Term) -> int:
    if isinstance(t, Lam):
        return 1 + size(t.body)
    if isinstance(t, App):
        return 1 + size(t.fun) + size(t.arg)
    return 1


def free_names(t: Term) -> set[str]:
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, Lam):
        return free_names(t.body) - {t.var}
    if isinstance(t, App):
        return free_names(t.fun) | free_names(t.arg)
    return set()


def constants(t: Term) -> dict[str, SimpleType]:
    if isinstance(t, Const):
        return {t.name: t.type}
    if isinstance(t, Lam):
        return constants(t.body)
    if isinstance(t, App):
        return {**constants(t.fun), **constants(t.arg)}
    return {}


def alpha_eq(t: Term, u: Term) -> bool:
    def db(x: Term, env: tuple) -> object:
        if isinstance(x, Var):
            return ("v", env.index(x.name)) if x.name in env else ("f", x.name)
        if isinstance(x, Const):
            return ("c", x.name, x.type)
        if isinstance(x, Lam):
            return ("l", x.vtype, db(x.body, (x.var,) + env))
        return ("a", db(x.fun, env), db(x.arg, env))
    return db(t, ()) == db(u, ())


# -- parsing -----------------------------------------------------------------------

class LambdaSyntaxError(ValueError):
    pass


_TOK = re.compile(r"\s*(->|→|[\\λ.:()]|⊥|[A-Za-z_][A-Za-z0-9_']*|\S)")


def _tokens(text: str) -> list[tuple[str, int]]:
    out = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOK.match(text, pos)
        out.append((m.group(1), m.start(1)))
        pos = m.end()
    out.append(("", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, decls: dict[str, SimpleType]):
        self.text = text
        self.toks = _tokens(text)
        self.i = 0
        self.decls = decls

    def peek(self) -> str:
        return self.toks[self.i][0]

    def take(self, want: str | None = None) -> str:
        tok, pos = self.toks[self.i]
        if want is not None and tok != want:
            raise LambdaSyntaxError(f"expected {want!r} at position {pos}, found {tok or 'end of input'!r}")
        self.i += 1
        return tok

    def ident(self) -> str:
        tok, pos = self.toks[self.i]
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_']*", tok or "-") or tok == "o":
            raise LambdaSyntaxError(f"expected a name at position {pos}, found {tok or 'end of input'!r}")
        self.i += 1
        return tok

    def type(self) -> SimpleType:
        if self.peek() == "(":
            self.take()
            left = self.type()
            self.take(")")
        elif self.peek() in ("o", "⊥"):
            self.take()
            left = BOT
        else:
            tok, pos = self.toks[self.i]
            raise LambdaSyntaxError(f"expected a type at position {pos}, found {tok or 'end of input'!r}")
        if self.peek() in ("->", "→"):
            self.take()
            return Arrow(left, self.type())
        return left

    def term(self, bound: frozenset) -> Term:
        if self.peek() in ("\\", "λ"):
            self.take()
            x = self.ident()
            self.take(":")
            t = self.type()
            self.take(".")
            return Lam(x, t, self.term(bound | {x}))
        head = self.atom(bound)
        while self.peek() not in ("", ")"):
            if self.peek() in ("\\", "λ"):
                return App(head, self.term(bound))
            head = App(head, self.atom(bound))
        return head

    def atom(self, bound: frozenset) -> Term:
        if self.peek() == "(":
            self.take()
            t = self.term(bound)
            self.take(")")
            return t
        x = self.ident()
        if x in bound:
            return Var(x)
        return Const(x, self.decls.get(x, BOT))

    def parse(self) -> Term:
        t = self.term(frozenset())
        if self.peek() != "":
            tok, pos = self.toks[self.i]
            raise LambdaSyntaxError(f"unexpected {tok!r} at position {pos}")
        return t


def parse_term(text: str, decls: dict[str, SimpleType] | None = None) -> Term:
    r"""Parse ``\x:T. body``, application by juxtaposition, types ``o`` and ``->``.

    Unbound names become constants, typed by ``decls`` or else of base type.
    """
    return _Parser(text, decls or {}).parse()


def parse_type(text: str) -> SimpleType:
    p = _Parser(text, {})
    t = p.type()
    if p.peek() != "":
        raise LambdaSyntaxError(f"unexpected {p.peek()!r} after type")
    return t


# -- typing and metrics ------------------------------------------------------------

class LambdaTypeError(TypeError):
    def __init__(self, message: str, path: str):
        super().__init__(f"{message} (at {path or 'root'})")
        self.path = path


def typecheck(t: Term, env: dict[str, SimpleType] | None = None) -> SimpleType:
    """The simple type of ``t``; free variables take their types from ``env``."""
    return _infer(t, dict(env or {}), "")


def _infer(t: Term, env: dict, path: str) -> SimpleType:
    if isinstance(t, Var):
        if t.name not in env:
            raise LambdaTypeError(f"unbound variable {t.name}", path)
        return env[t.name]
    if isinstance(t, Const):
        return t.type
    if isinstance(t, Lam):
        inner = dict(env)
        inner[t.var] = t.vtype
        return Arrow(t.vtype, _infer(t.body, inner, path + "λ"))
    f = _infer(t.fun, env, path + "<")
    a = _infer(t.arg, env, path + ">")
    if not isinstance(f, Arrow):
        raise LambdaTypeError(f"applying a term of base type to an argument", path)
    if f.dom != a:
        raise LambdaTypeError(f"argument of type {a} where {f.dom} is expected", path)
    return f.cod


def subterm_types(t: Term, env: dict | None = None) -> Iterator[SimpleType]:
    env = dict(env or {})
    stack = [(t, env)]
    while stack:
        u, e = stack.pop()
        yield _infer(u, e, "")
        if isinstance(u, Lam):
            inner = dict(e)
            inner[u.var] = u.vtype
            stack.append((u.body, inner))
        elif isinstance(u, App):
            stack.append((u.fun, e))
            stack.append((u.arg, e))


def sh(t: Term) -> int:
    """``sh(x) = 1``, ``sh(\\x.S) = sh(S)``, ``sh(S T) = max(sh S, sh T + 1)``."""
    if isinstance(t, Lam):
        return sh(t.body)
    if isinstance(t, App):
        return max(sh(t.fun), sh(t.arg) + 1)
    return 1


def height(t: Term) -> int:
    """``h(x) = 1``, ``h(\\x.M) = h(M)``, ``h(M N) = max(h M, h N) + 1``."""
    if isinstance(t, Lam):
        return height(t.body)
    if isinstance(t, App):
        return max(height(t.fun), height(t.arg)) + 1
    return 1


def degree(t: Term, env: dict | None = None) -> int:
    """Highest type level over all subterms."""
    return max(level(ty) for ty in subterm_types(t, env))


@dataclass
class Metrics:
    sh: int
    h: int
    g: int


def metrics(t: Term, env: dict | None = None) -> Metrics:
    return Metrics(sh(t), height(t), degree(t, env))


def is_beta_normal(t: Term) -> bool:
    if isinstance(t, Lam):
        return is_beta_normal(t.body)
    if isinstance(t, App):
        return not isinstance(t.fun, Lam) and is_beta_normal(t.fun) and is_beta_normal(t.arg)
    return True


# -- names ---------------------------------------------------------------------------

class Fresh:
    """Fresh-name supply; names look like ``x'3`` and never clash with parsed input."""

    def __init__(self):
        self.counter = itertools.count()

    def __call__(self, base: str) -> str:
        root = base.split("'")[0] or "v"
        return f"{root}'{next(self.counter)}'"


def rename_bound(t: Term, fresh: Fresh, env: dict | None = None) -> Term:
    """Give every binder a fresh name (capture-free copy)."""
    env = env or {}
    if isinstance(t, Var):
        return Var(env.get(t.name, t.name))
    if isinstance(t, Const):
        return t
    if isinstance(t, Lam):
        y = fresh(t.var)
        return Lam(y, t.vtype, rename_bound(t.body, fresh, {**env, t.var: y}))
    return App(rename_bound(t.fun, fresh, env), rename_bound(t.arg, fresh, env))


def substitute(t: Term, x: str, u: Term, fresh: Fresh) -> Term:
    """Capture-avoiding ``t[u/x]``."""
    if isinstance(t, Var):
        return u if t.name == x else t
    if isinstance(t, Const):
        return t
    if isinstance(t, App):
        return App(substitute(t.fun, x, u, fresh), substitute(t.arg, x, u, fresh))
    if t.var == x:
        return t
    if t.var in free_names(u):
        y = fresh(t.var)
        body = substitute(t.body, t.var, Var(y), fresh)
        return Lam(y, t.vtype, substitute(body, x, u, fresh))
    return Lam(t.var, t.vtype, substitute(t.body, x, u, fresh))


# -- head linear reduction: term rewriting ---------------------------------------------

@dataclass
class HLRResult:
    steps: int
    final: Term | None
    trace: list[tuple[str, str]] = field(default_factory=list, repr=False)


def _head_step(t: Term, fresh: Fresh) -> tuple[Term, str, Term] | None:
    """One head linear step, or ``None`` when the head variable is not in a redex."""
    path: list[Term] = []
    pending: list[Term] = []
    paired: dict[str, Term] = {}
    u = t
    while True:
        if isinstance(u, App):
            path.append(u)
            pending.append(u.arg)
            u = u.fun
        elif isinstance(u, Lam):
            path.append(u)
            if pending:
                paired[u.var] = pending.pop()
            u = u.body
        else:
            break
    if not isinstance(u, Var) or u.name not in paired:
        return None
    arg = paired[u.name]
    new = rename_bound(arg, fresh)
    # rebuild the spine bottom-up with the copy at the head
    for node in reversed(path):
        new = App(new, node.arg) if isinstance(node, App) else Lam(node.var, node.vtype, new)
    where = "".join("@" if isinstance(n, App) else "λ" for n in path)
    return new, where, arg


def hlr_run(t: Term, budget: int = DEFAULT_STEP_BUDGET, trace: bool = False,
            on_step=None) -> HLRResult:
    """Iterate head linear reduction by rewriting; ``steps`` is the chain length."""
    fresh = Fresh()
    cur = rename_bound(t, fresh)
    steps = 0
    log = []
    while True:
        nxt = _head_step(cur, fresh)
        if nxt is None:
            return HLRResult(steps, cur, log)
        cur, where, arg = nxt
        steps += 1
        if trace:
            log.append((where, format_term(arg)))
        if on_step is not None:
            on_step(cur)
        if steps >= budget:
            raise BudgetExceeded(f"head linear reduction exceeded {budget} steps", explored=steps)


# -- head linear reduction: Krivine machine -------------------------------------------

def _compile(t: Term, env: tuple = ()):
    if isinstance(t, Var):
        if t.name in env:
            return (0, env.index(t.name))
        return (3, t.name)
    if isinstance(t, Const):
        return (3, t.name)
    if isinstance(t, Lam):
        return (1, _compile(t.body, (t.var,) + env))
    return (2, _compile(t.fun, env), _compile(t.arg, env))


def kam_steps(t: Term, budget: int = DEFAULT_STEP_BUDGET) -> int:
    """Head linear reduction length via a Krivine machine.

    Abstractions met with an empty stack are entered with their variable left
    free (they are head abstractions), so evaluation proceeds under binders
    exactly as head reduction does.
    """
    code = _compile(t)
    env = None  # linked list (closure, next); closure None = free variable
    stack = None
    steps = 0
    while True:
        tag = code[0]
        if tag == 2:
            stack = ((code[2], env), stack)
            code = code[1]
        elif tag == 1:
            if stack is not None:
                clo, stack = stack
            else:
                clo = None
            env = (clo, env)
            code = code[1]
        elif tag == 0:
            e = env
            for _ in range(code[1]):
                e = e[1]
            clo = e[0]
            if clo is None:
                return steps
            steps += 1
            if steps > budget:
                raise BudgetExceeded(f"head linear reduction exceeded {budget} steps", explored=steps)
            code, env = clo
        else:
            return steps


# -- constructions -------------------------------------------------------------------

def identity(t: SimpleType = BOT) -> Term:
    return Lam("x", t, Var("x"))


def church(n: int, p: int) -> Term:
    """The Church numeral for ``n`` at type ``A_{p+2}``: ``\\f:A_{p+1}. \\x:A_p. f (... (f x))``."""
    body: Term = Var("x")
    for _ in range(n):
        body = App(Var("f"), body)
    return Lam("f", church_type(p + 1), Lam("x", church_type(p), body))


def lower_bound_family(n: int) -> Term:
    """``S_n id = 2_n 2_{n-1} ... 2_0 id`` with each ``2_k`` the numeral 2 at type ``A_{k+2}``."""
    t = church(2, n)
    for k in range(n - 1, -1, -1):
        t = App(t, church(2, k))
    return App(t, identity())


def eta_long(t: Term, env: dict | None = None, fresh: Fresh | None = None) -> Term:
    """Expand every arrow-typed subterm not in function position into an abstraction."""
    fresh = fresh or Fresh()
    return _eta(t, dict(env or {}), fresh)


def _eta(t: Term, env: dict, fresh: Fresh) -> Term:
    if isinstance(t, Lam):
        inner = dict(env)
        inner[t.var] = t.vtype
        return Lam(t.var, t.vtype, _eta(t.body, inner, fresh))
    head, args = spine(t)
    if isinstance(head, Lam):
        head = _eta(head, env, fresh)
    out = apps(head, *[_eta(a, env, fresh) for a in args])
    ty = _infer(t, env, "")
    extra, _ = split_arrows(ty)
    names = [fresh("y") for _ in extra]
    inner = dict(env)
    for y, a in zip(names, extra):
        inner[y] = a
    out = apps(out, *[_eta(Var(y), inner, fresh) for y in names])
    for y, a in reversed(list(zip(names, extra))):
        out = Lam(y, a, out)
    return out


def is_eta_long(t: Term, env: dict | None = None) -> bool:
    return alpha_eq(eta_long(t, env), t)


def delay_symbol(ty: Arrow) -> Const:
    """``y_{A,B} : (A -> B) -> A -> B`` for a redex whose abstraction has type ``A -> B``."""
    return Const(f"y[{ty}]", Arrow(ty, ty))


def delay_redexes(t: Term, env: dict | None = None) -> Term:
    """Replace each redex ``(\\x.S) T`` by ``y_{A,B} (\\x.S) T``; the result is beta-normal."""
    return _delay(t, dict(env or {}))


def _delay(t: Term, env: dict) -> Term:
    if isinstance(t, Lam):
        inner = dict(env)
        inner[t.var] = t.vtype
        return Lam(t.var, t.vtype, _delay(t.body, inner))
    if isinstance(t, App):
        f, a = _delay(t.fun, env), _delay(t.arg, env)
        if isinstance(t.fun, Lam):
            return App(App(delay_symbol(_infer(t.fun, env, "")), f), a)
        return App(f, a)
    return t


@dataclass
class GameSituation:
    head: Term
    args: list[Term]
    bound: Tower
    faults: list[str] = field(default_factory=list)


class NotAGameSituation(ValueError):
    pass


def game_situation(t: Term, env: dict | None = None, strict: bool = True) -> GameSituation:
    """Split ``S T_1 ... T_p`` and evaluate ``2_{max lv(A_i) - 1}^{sh(S)(max sh(T_i) + 1)}``.

    The bound is only claimed when every part is eta-long and beta-normal.
    With ``strict=False`` the formula is still evaluated on other spines
    (Church numerals, for instance, are not eta-long) and the failed checks
    are returned in ``faults`` instead of raised.
    """
    head, args = spine(t)
    if not args:
        raise NotAGameSituation("not an application")
    faults = []
    for name, part in [("head", head)] + [(f"argument {k + 1}", a) for k, a in enumerate(args)]:
        if not is_beta_normal(part):
            faults.append(f"{name} is not beta-normal")
        elif not is_eta_long(part, env):
            faults.append(f"{name} is not eta-long")
    if faults and strict:
        raise NotAGameSituation("; ".join(faults))
    top_level = max(level(typecheck(a, env)) for a in args)
    if top_level < 1:
        raise OutOfHypothesis("every argument has base type; the tower height would be negative")
    exponent = sh(head) * (max(sh(a) for a in args) + 1)
    return GameSituation(head, args, Tower(top_level - 1, exponent), faults)


def evaluator(ty: Arrow) -> Term:
    """eta-long form of ``\\f:(A -> B). \\a:A. f a``."""
    return eta_long(Lam("f", ty, Lam("a", ty.dom, App(Var("f"), Var("a")))))


@dataclass
class GeneralBound:
    bound: Tower
    g: int
    h: int
    construction: Term


def general_bound(t: Term) -> GeneralBound:
    """``2_g^{(h+g+1)(g+1)}`` together with the game situation that justifies it.

    The construction delays every redex, eta-expands, abstracts the delaying
    symbols and feeds them evaluators: ``(\\y_1 ... y_p. eta(S^t)) ev_1 ... ev_p``.
    """
    if free_names(t):
        raise ValueError("the general bound needs a closed term")
    typecheck(t)
    g, h = degree(t), height(t)
    delayed = eta_long(delay_redexes(t))
    symbols = sorted((name, sty) for name, sty in constants(delayed).items() if name.startswith("y["))
    body = delayed
    names = {}
    for k, (name, _) in enumerate(symbols):
        names[name] = f"ydelay{k}"
    body = _abstract(body, names)
    for name, sty in reversed(symbols):
        body = Lam(names[name], sty, body)
    wrapped = apps(body, *[evaluator(sty.dom) for _, sty in symbols])
    return GeneralBound(Tower(g, (h + g + 1) * (g + 1)), g, h, wrapped)


def _abstract(t: Term, names: dict[str, str]) -> Term:
    if isinstance(t, Const):
        return Var(names[t.name]) if t.name in names else t
    if isinstance(t, Lam):
        return Lam(t.var, t.vtype, _abstract(t.body, names))
    if isinstance(t, App):
        return App(_abstract(t.fun, names), _abstract(t.arg, names))
    return t


# -- random corpora ---------------------------------------------------------------------

TYPE_POOL = (church_type(1), church_type(2), arrows(BOT, BOT, BOT))


def random_normal_term(rng: random.Random, ty: SimpleType, env: list[tuple[str, SimpleType]],
                       depth: int, fresh: Fresh) -> Term:
    """A random eta-long beta-normal term of type ``ty``; heads come from ``env``."""
    if isinstance(ty, Arrow):
        x = fresh("x")
        return Lam(x, ty.dom, random_normal_term(rng, ty.cod, env + [(x, ty.dom)], depth, fresh))
    heads = [(x, t) for x, t in env if split_arrows(t)[1] == BOT]
    if depth <= 0:
        heads = [(x, t) for x, t in heads if not isinstance(t, Arrow)] or heads
    x, t = rng.choice(heads)
    args = [random_normal_term(rng, a, env, depth - 1, fresh) for a in split_arrows(t)[0]]
    return apps(Var(x), *args)


def random_game_situation(rng: random.Random, max_args: int = 2, depth: int = 2) -> Term:
    """``S T_1 ... T_p`` with closed eta-long beta-normal parts; ``S`` ends in type ``o -> o``."""
    fresh = Fresh()
    arg_types = [rng.choice(TYPE_POOL) for _ in range(rng.randint(1, max_args))]
    head_type = arrows(*arg_types, church_type(1))
    head = random_normal_term(rng, head_type, [], depth, fresh)
    args = [random_normal_term(rng, a, [], depth, fresh) for a in arg_types]
    return apps(head, *args)


def random_closed_term(rng: random.Random, ty: SimpleType | None = None, depth: int = 3,
                       redex_rate: float = 0.3) -> Term:
    """A random closed term, redexes included, built from types in the pool (degree <= 3)."""
    fresh = Fresh()
    return _random_term(rng, ty or church_type(1), [], depth, fresh, redex_rate)


def _random_term(rng, ty, env, depth, fresh, rate) -> Term:
    if isinstance(ty, Arrow) and (depth <= 0 or rng.random() < 0.7):
        x = fresh("x")
        return Lam(x, ty.dom, _random_term(rng, ty.cod, env + [(x, ty.dom)], depth, fresh, rate))
    if depth > 0 and rng.random() < rate:
        has_base = any(t == BOT for _, t in env)
        a = rng.choice(((BOT,) if has_base else ()) + TYPE_POOL[:2])
        x = fresh("x")
        body = _random_term(rng, ty, env + [(x, a)], depth - 1, fresh, rate)
        return App(Lam(x, a, body), _random_term(rng, a, env, depth - 1, fresh, rate))
    heads = [(x, t) for x, t in env if _ends_in(t, ty)]
    if not heads:
        if isinstance(ty, Arrow):
            x = fresh("x")
            return Lam(x, ty.dom, _random_term(rng, ty.cod, env + [(x, ty.dom)], depth, fresh, rate))
        raise AssertionError("no head of base type in scope")
    if depth <= 0:
        short = [h for h in heads if len(split_arrows(h[1])[0]) == len(split_arrows(ty)[0])]
        heads = short or heads
    x, t = rng.choice(heads)
    doms, _ = split_arrows(t)
    need = len(doms) - len(split_arrows(ty)[0])
    args = [_random_term(rng, a, env, depth - 1, fresh, rate) for a in doms[:need]]
    return apps(Var(x), *args)


def _ends_in(t: SimpleType, target: SimpleType) -> bool:
    while True:
        if t == target:
            return True
        if not isinstance(t, Arrow):
            return False
        t = t.cod
