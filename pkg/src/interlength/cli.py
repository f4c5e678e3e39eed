"""``interlength`` command line.

Each subcommand computes something, checks it against an independent oracle
or a bound, and prints a report.  ``--format records`` switches to
newline-delimited JSON: a header line ``{"format": "interlength-records",
"version": 1, ...}`` followed by one object per record, each with a ``kind``
field.  The exit status is 0 only if every PASS/AGREE check succeeded, 1 if
one failed, 2 on bad input and 3 when a budget ran out.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import dataclass

from . import __version__
from . import certificates as cert
from . import lam
from . import pointers as pt
from . import powersum as ps
from .agents import (
    AgentParseError, agent, agent_metrics, atomic_pair, atomic_upper_bound, conjecture_product,
    conjecture_sweep, format_agent, longest_reduction, nd_via_agents, parse_agent,
    sandwich, surviving_readings, upper_bound,
)
from .errors import BudgetExceeded, OutOfHypothesis
from .tower import Tower, DEFAULT_BIT_CAP

RECORDS_VERSION = 1


@dataclass
class RunConfig:
    budget_agents: int = 10**7
    budget_play_len: int = pt.DEFAULT_PLAY_LEN
    budget_steps: int = lam.DEFAULT_STEP_BUDGET
    tower_bits: int = DEFAULT_BIT_CAP
    format: str = "human"
    seed: int = 0
    witness: bool = False

    def __post_init__(self):
        for name in ("budget_agents", "budget_play_len", "budget_steps", "tower_bits"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name.replace('_', '-')} must be positive")


class Report:
    """Collects records, prints them in the chosen format and tracks verdicts."""

    def __init__(self, config: RunConfig, command: str, out=None):
        self.config = config
        self.out = out or sys.stdout
        self.failed = False
        if config.format == "records":
            self._write({"format": "interlength-records", "version": RECORDS_VERSION,
                         "tool_version": __version__, "command": command, "seed": config.seed})

    def _write(self, obj):
        print(json.dumps(obj, default=str), file=self.out)

    def emit(self, kind: str, human: str | None = None, /, **fields):
        if self.config.format == "records":
            self._write({"kind": kind, **fields})
        else:
            if human is None:
                human = "  ".join(f"{k}={v}" for k, v in fields.items())
            print(human, file=self.out)

    def check(self, name: str, ok: bool, detail: str = "", good: str = "PASS", bad: str = "FAIL"):
        verdict = good if ok else bad
        self.failed |= not ok
        self.emit("check", f"{verdict}  {name}" + (f"  ({detail})" if detail else ""),
                  name=name, verdict=verdict, ok=ok, detail=detail)


def _tower_text(t: Tower, cfg: RunConfig) -> str:
    return t.describe(cfg.tower_bits)


# -- subcommands ------------------------------------------------------------------

def cmd_longest(args, cfg: RunConfig, rep: Report):
    a = parse_agent(args.agent)
    stats = longest_reduction(a, budget=cfg.budget_agents, witness=cfg.witness)
    size, mx, depth = agent_metrics(a)
    rep.emit("longest", f"N({format_agent(a)}) = {stats.longest}   explored {stats.explored} agents",
             agent=format_agent(a), N=stats.longest, explored=stats.explored,
             size=size, max_label=mx, depth=depth)
    if stats.witness is not None:
        for k, step in enumerate(stats.witness, 1):
            rep.emit("witness", f"  {k:>4}  {format_agent(step)}", index=k, agent=format_agent(step))
    try:
        bound = upper_bound(a)
    except OutOfHypothesis as exc:
        rep.emit("bound", f"bound: not applicable ({exc})", applicable=False, reason=str(exc))
        return
    rep.emit("bound", f"bound {_tower_text(bound, cfg)}", applicable=True, bound=str(bound))
    rep.check("N(a) <= bound", bound.compare(stats.longest) >= 0, f"{stats.longest} vs {bound}")


def cmd_nd(args, cfg: RunConfig, rep: Report):
    n, p, d = args.n, args.p, args.d
    if d < 2 or n < 0 or p < 0:
        raise OutOfHypothesis(f"need n, p >= 0 and d >= 2, got n={n} p={p} d={d}")
    via_agents = nd_via_agents(n, p, d, budget=cfg.budget_agents)
    rep.emit("nd", f"N_{d}({n},{p}) via agents = {via_agents}", n=n, p=p, d=d,
             method="agents", value=via_agents)
    try:
        stats = pt.enumerate_interactions(n, p, d, max_len=cfg.budget_play_len)
    except BudgetExceeded as exc:
        rep.emit("nd", f"play enumeration skipped: {exc}", n=n, p=p, d=d,
                 method="plays", skipped=True, reason=str(exc))
        return
    rep.emit("nd", f"N_{d}({n},{p}) via plays  = {stats.max_length}   ({stats.count} plays)",
             n=n, p=p, d=d, method="plays", value=stats.max_length, plays=stats.count)
    rep.check("agents and plays agree", stats.max_length == via_agents,
              f"{via_agents} vs {stats.max_length}", good="AGREE", bad="DISAGREE")


ACCEPTANCE_SWEEP_FLOOR = 6


def cmd_conjecture(args, cfg: RunConfig, rep: Report):
    if args.max_sum < ACCEPTANCE_SWEEP_FLOOR:
        rep.emit("sweep", f"note: n+p <= {args.max_sum} is below the acceptance floor "
                          f"n+p <= {ACCEPTANCE_SWEEP_FLOOR}", max_sum=args.max_sum,
                 below_floor=True)
    rows = conjecture_sweep(args.max_sum, budget=cfg.budget_agents)
    for r in rows:
        rep.emit("row", f"n={r.n:<3} p={r.p:<3} N_3={r.value:<10} product={'yes' if r.product else 'no':<4}"
                        f" power={'yes' if r.power else 'no':<4} explored={r.explored}",
                 n=r.n, p=r.p, value=r.value, explored=r.explored,
                 product=r.product, power=r.power, product_value=conjecture_product(r.n, r.p))
    alive = surviving_readings(rows)
    for reading in ("product", "power"):
        state = "SURVIVES" if reading in alive else "REFUTED"
        rep.emit("reading", f"{reading} reading: {state}", reading=reading, survives=reading in alive)
    if rows:
        rep.check("exactly one reading survives", len(alive) == 1, ", ".join(alive) or "none")


def cmd_bound(args, cfg: RunConfig, rep: Report):
    if args.atomic:
        n, p, d = args.atomic
        a = atomic_pair(n, p, d)
    else:
        if args.agent is None:
            raise ValueError("give an agent literal or --atomic N P D")
        a = parse_agent(args.agent)
    bound = upper_bound(a)
    rep.emit("bound", f"bound for {format_agent(a)}: {_tower_text(bound, cfg)}",
             agent=format_agent(a), bound=str(bound), height=bound.height, top=bound.top)
    if args.no_check:
        return
    N = longest_reduction(a, budget=cfg.budget_agents).longest
    rep.check("N(a) <= bound", bound.compare(N) >= 0, f"N={N}")
    if args.atomic:
        n, p, d = args.atomic
        nd = N + 1
        for variant in ("plain", "sharp"):
            try:
                t = atomic_upper_bound(n, p, d, variant)
            except OutOfHypothesis as exc:
                rep.emit("variant", f"{variant} variant: not applicable ({exc})", variant=variant,
                         applicable=False)
                continue
            holds = t.compare(nd) >= 0
            rep.emit("variant", f"{variant} variant {t}: {'holds' if holds else 'VIOLATED'} for N_d={nd}",
                     variant=variant, applicable=True, bound=str(t), nd=nd, holds=holds)
        try:
            low, high = sandwich(n, p, d)
            rep.emit("sandwich", f"sandwich {low} <= N_d <= {high}", lower=str(low), upper=str(high))
        except OutOfHypothesis:
            pass


def cmd_certify(args, cfg: RunConfig, rep: Report):
    a = parse_agent(args.agent)
    bound, dv = cert.certify(a, node_limit=args.node_limit)
    ok = cert.check(dv)
    alpha = dv.alpha
    rep.emit("certificate", f"certified alpha {ps.describe(alpha)}  rho {dv.rho}  "
                            f"{cert.node_count(dv)} nodes  tower bound {_tower_text(bound, cfg)}",
             agent=format_agent(a), alpha=ps.to_text(alpha), rho=dv.rho,
             nodes=cert.node_count(dv), tower=str(bound))
    if cfg.witness:
        try:
            text = cert.dump(dv, max_lines=args.max_lines)
        except cert.DerivationTooLarge as exc:
            rep.emit("derivation", f"derivation not printed: {exc}", skipped=True, reason=str(exc))
        else:
            rep.emit("derivation", text.rstrip("\n"), text=text)
    rep.check("derivation checks", ok, cert.explain(dv) or "")
    try:
        N = longest_reduction(a, budget=cfg.budget_agents).longest
    except BudgetExceeded as exc:
        rep.emit("longest", f"longest reduction skipped: {exc}", skipped=True)
        return
    rep.check("alpha >= N(a)", ps.compare(alpha, N) >= 0, f"N={N}")


def cmd_hlr(args, cfg: RunConfig, rep: Report):
    if args.family is not None:
        t = lam.lower_bound_family(args.family)
    elif args.term is None:
        raise ValueError("give a term literal or --family N")
    else:
        t = lam.parse_term(args.term)
    ty = lam.typecheck(t)
    steps = lam.kam_steps(t, budget=cfg.budget_steps)
    m = lam.metrics(t)
    rep.emit("hlr", f"{steps} head linear steps   type {ty}   sh={m.sh} h={m.h} g={m.g} lv={lam.level(ty)}",
             term=lam.format_term(t), type=str(ty), steps=steps,
             sh=m.sh, h=m.h, g=m.g, lv=lam.level(ty))
    if cfg.witness:
        try:
            run = lam.hlr_run(t, budget=min(cfg.budget_steps, 10_000), trace=True)
        except BudgetExceeded as exc:
            rep.emit("trace", f"trace skipped: {exc}", skipped=True)
        else:
            for k, (where, arg) in enumerate(run.trace, 1):
                rep.emit("trace", f"  {k:>5}  at {where or 'root'}  <- {arg}", index=k, position=where, argument=arg)
    if args.family is not None:
        low = Tower(args.family + 1, 1)
        rep.check("steps >= lower bound", low.compare(steps) <= 0, f"{steps} vs {_tower_text(low, cfg)}")
    if not lam.free_names(t):
        gb = lam.general_bound(t)
        rep.emit("bound", f"general bound {_tower_text(gb.bound, cfg)}", which="general", bound=str(gb.bound))
        rep.check("steps <= general bound", gb.bound.compare(steps) >= 0)
    try:
        gs = lam.game_situation(t)
    except (lam.NotAGameSituation, OutOfHypothesis) as exc:
        rep.emit("bound", f"not a game situation: {exc}", which="game", applicable=False)
    else:
        rep.emit("bound", f"game situation bound {_tower_text(gs.bound, cfg)}", which="game",
                 applicable=True, bound=str(gs.bound))
        rep.check("steps <= game situation bound", gs.bound.compare(steps) >= 0)


def cmd_simulate(args, cfg: RunConfig, rep: Report):
    n, p, d = args.n, args.p, args.d
    plays = steps = failures = 0
    for s in pt.maximal_interactions(n, p, d, max_len=cfg.budget_play_len):
        plays += 1
        mem = pt.Membership(s)
        triple = (agent(n), d, agent(p))
        for i in range(len(s) - 1):
            try:
                nxt = pt.simulate_step(s, i, *triple, membership=mem)
            except pt.SimulationError as exc:
                failures += 1
                rep.emit("failure", f"play {pt.format_play(s)} move {i + 1}: {exc}",
                         play=pt.format_play(s), move=i + 1, reason=str(exc))
                break
            steps += 1
            triple = nxt
    rep.emit("simulate", f"{plays} maximal plays, {steps} steps verified, {failures} failures",
             n=n, p=p, d=d, plays=plays, steps=steps, failures=failures)
    rep.check("every step simulated", failures == 0)


# -- argument parsing -------------------------------------------------------------

def _globals(parser: argparse.ArgumentParser, suppress: bool):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    g = parser.add_argument_group("global options")
    g.add_argument("--budget-agents", type=int, default=d(RunConfig.budget_agents),
                   help="cap on distinct agents explored")
    g.add_argument("--budget-play-len", type=int, default=d(RunConfig.budget_play_len),
                   help="cap on enumerated play length")
    g.add_argument("--budget-steps", type=int, default=d(RunConfig.budget_steps),
                   help="cap on head linear reduction steps")
    g.add_argument("--tower-bits", type=int, default=d(RunConfig.tower_bits),
                   help="largest bit length expanded when printing towers")
    g.add_argument("--format", choices=("human", "records"), default=d("human"))
    g.add_argument("--seed", type=int, default=d(0))
    g.add_argument("--witness", action="store_true", default=d(False),
                   help="print witness chains, derivations or reduction traces")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="interlength", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        _globals(sp, suppress=True)
        sp.set_defaults(func=func)
        return sp

    sp = add("longest", cmd_longest, "longest reduction from an agent, against the tower bound")
    sp.add_argument("agent")
    sp = add("nd", cmd_nd, "N_d(n, p) by agent search and by play enumeration")
    for x in ("n", "p", "d"):
        sp.add_argument(x, type=int)
    sp = add("conjecture", cmd_conjecture, "depth-3 sweep against both closed-form readings")
    sp.add_argument("max_sum", type=int, nargs="?", default=8,
                    help="largest n + p swept (default 8)")
    sp = add("bound", cmd_bound, "tower bound for an agent or an atomic interaction")
    sp.add_argument("agent", nargs="?")
    sp.add_argument("--atomic", type=int, nargs=3, metavar=("N", "P", "D"))
    sp.add_argument("--no-check", action="store_true", help="skip computing N(a)")
    sp = add("certify", cmd_certify, "build and check a cut-free derivation bounding N(a)")
    sp.add_argument("agent")
    sp.add_argument("--node-limit", type=int, default=cert.DEFAULT_NODE_LIMIT)
    sp.add_argument("--max-lines", type=int, default=10_000)
    sp = add("hlr", cmd_hlr, "head linear reduction length of a simply typed term")
    sp.add_argument("term", nargs="?")
    sp.add_argument("--family", type=int, metavar="N", help="use the lower-bound term S_N id")
    sp = add("simulate", cmd_simulate, "map every play step to an agent reduction")
    for x in ("n", "p", "d"):
        sp.add_argument(x, type=int)
    return parser


def main(argv=None, out=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig(args.budget_agents, args.budget_play_len, args.budget_steps,
                        args.tower_bits, args.format, args.seed, args.witness)
    except ValueError as exc:
        parser.error(str(exc))
    random.seed(cfg.seed)
    rep = Report(cfg, args.command, out)
    try:
        args.func(args, cfg, rep)
    except BudgetExceeded as exc:
        rep.emit("error", f"budget exceeded: {exc}", error="budget", message=str(exc), explored=exc.explored)
        return 3
    except cert.DerivationTooLarge as exc:
        rep.emit("error", f"derivation too large: {exc}", error="budget", message=str(exc))
        return 3
    except (AgentParseError, lam.LambdaSyntaxError) as exc:
        rep.emit("error", f"parse error: {exc}", error="parse", message=str(exc))
        return 2
    except lam.LambdaTypeError as exc:
        rep.emit("error", f"type error: {exc}", error="type", message=str(exc))
        return 2
    except (OutOfHypothesis, ValueError) as exc:
        rep.emit("error", f"precondition: {exc}", error="precondition", message=str(exc))
        return 2
    return 1 if rep.failed else 0


if __name__ == "__main__":
    sys.exit(main())
