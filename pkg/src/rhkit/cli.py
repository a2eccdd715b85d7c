"""Command-line front end: ``rhkit <command> ...``.

Every command writes a line-oriented ``key=value`` report.  Exit status is 0
for a definite answer, 2 when a budget ran out (Unknown, Timeout, NotFound)
and 1 for input errors.
"""
from __future__ import annotations

import argparse
import hashlib
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .coned import ConedGraph, ContractViolation, angle, cone, explore, parse_fragment, sector
from .equations import (Budget, LiftingData, bounded_solve, decide_existential, enumerate_central_triples,
                        enumerate_param_reps, parse_system, triangulate)
from .factors import Unsupported
from .geolang import (BudgetExceeded, SectorTable, build_L_automaton, compute_L0, derive_constants,
                      gnr_accepts, parse_automaton, subtract_finite, toy_constants)
from .oracles import family_oracles, group_wp
from .presentation import load_presentation, presentation_text
from .recognition import (RecognitionConfig, VocabularyCapExceeded, find_abelian_structure,
                          hyperbolicity_constant, recognize, simple_loop_list)
from .va import parse_va_spec, va_decide
from .words import MalformedInput, word_inverse

DEFINITE = {"LinearIsop", "NonExact", "Found", "Sat", "Unsat", "ok", "accept", "reject"}


class UsageError(Exception):
    pass


@dataclass
class Report:
    """Ordered ``key=value`` entries; ``emit`` and ``parse_report`` are inverse."""

    entries: list = field(default_factory=list)

    def add(self, key: str, value) -> None:
        text = str(value).replace("\\", "\\\\").replace("\n", "\\n")
        self.entries.append((key, text))

    def get(self, key: str, default=None):
        for k, v in self.entries:
            if k == key:
                return v
        return default

    def all(self, key: str) -> list:
        return [v for k, v in self.entries if k == key]

    def emit(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in self.entries)

    @property
    def outcome(self):
        return self.get("outcome")


def parse_report(text: str) -> Report:
    rep = Report()
    for line in text.splitlines():
        if not line:
            continue
        k, sep, v = line.partition("=")
        if not sep:
            raise MalformedInput(f"report line without '=': {line!r}")
        rep.entries.append((k, v))
    return rep


def emit_report(report: Report, path: str | None = None) -> None:
    text = report.emit()
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


# -- argument parsing --------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _common(p):
    p.add_argument("--report", metavar="PATH", help="write the report here instead of stdout")
    p.add_argument("--timing", action="store_true", help="add a timing line (breaks byte-determinism)")
    p.add_argument("--jobs", type=int, default=None, help="parallelism degree (results do not depend on it)")
    p.add_argument("-v", "--verbose", action="store_true")


def _pres_arg(p, wp=True):
    p.add_argument("-p", "--presentation", required=True, metavar="FILE")
    if wp:
        p.add_argument("--wp", metavar="FAMILY", help="builtin:<family> or table:<file>")


def _toy_args(p):
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--m", type=float, default=1.0, dest="M")
    p.add_argument("--fellow", type=float, default=1.0, help="fellow-travelling constant D")
    p.add_argument("--toy", action="store_true", help="use the toy constants below")
    p.add_argument("--theta", type=int, default=1)
    p.add_argument("--L", type=int, default=3, dest="L")
    p.add_argument("--L1", type=int, default=1)
    p.add_argument("--L2", type=int, default=0)
    p.add_argument("--L2p", type=int, default=2)


def _recog_args(p):
    p.add_argument("--cap", type=int, default=None, help="cells per diagram (theory: 240K)")
    p.add_argument("--max-diagrams", type=int, default=None)
    p.add_argument("--product-cap", type=int, default=None)
    p.add_argument("--polygon-cap", type=int, default=None)
    p.add_argument("--exact-len", type=int, default=None, help="word length in the exactness check")
    p.add_argument("--verify-length", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="rhkit", description="Relatively hyperbolic group toolkit")
    top.add_argument("--version", action="version", version=f"rhkit {__version__}")
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("graph", help="coned-off graph fragments").add_subparsers(dest="action", required=True)
    p = g.add_parser("explore")
    _pres_arg(p)
    p.add_argument("--radius", type=int, required=True)
    p.add_argument("--cone-budget", type=int, default=None, help="radius of truncated cone stars")
    p.add_argument("--out", required=True)
    _common(p)
    p = g.add_parser("angle")
    p.add_argument("fragment")
    p.add_argument("vertex", type=int)
    p.add_argument("u1", type=int)
    p.add_argument("u2", type=int)
    p.add_argument("--cutoff", type=int, default=6)
    _common(p)
    p = g.add_parser("cone")
    p.add_argument("fragment")
    p.add_argument("tail", type=int)
    p.add_argument("head", type=int)
    p.add_argument("--rho", type=int, required=True)
    p.add_argument("--theta", type=int, required=True)
    _common(p)
    p = g.add_parser("sector")
    p.add_argument("fragment")
    p.add_argument("--parabolic", required=True)
    p.add_argument("--theta", type=int, required=True)
    _common(p)

    lg = sub.add_parser("lang", help="geometric language automata").add_subparsers(dest="action", required=True)
    p = lg.add_parser("build-L")
    _pres_arg(p)
    _toy_args(p)
    p.add_argument("--max-states", type=int, default=20000)
    p.add_argument("--out", required=True)
    _common(p)
    p = lg.add_parser("accept")
    p.add_argument("automaton")
    p.add_argument("element")
    _pres_arg(p, wp=False)
    _common(p)
    p = lg.add_parser("l0")
    _pres_arg(p)
    _toy_args(p)
    _common(p)

    p = sub.add_parser("solve", help="equations over the group")
    _pres_arg(p)
    p.add_argument("-s", "--system", required=True)
    p.add_argument("--mode", choices=("bounded", "va"), default="bounded")
    p.add_argument("--va-spec")
    p.add_argument("--budget", type=int, default=2)
    p.add_argument("--triple-bound", type=int, default=1)
    p.add_argument("--max-members", type=int, default=500)
    _toy_args(p)
    _common(p)

    p = sub.add_parser("recognize", help="linear isoperimetry recognition")
    _pres_arg(p)
    p.add_argument("--k-start", type=int, default=1)
    p.add_argument("--k-max", type=int, default=10 ** 6)
    _recog_args(p)
    _common(p)

    p = sub.add_parser("loops", help="simple loops of the coned-off graph")
    _pres_arg(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--length", type=int, required=True)
    _recog_args(p)
    _common(p)

    p = sub.add_parser("delta", help="hyperbolicity constant from K")
    _pres_arg(p, wp=False)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--coefficient", type=int, default=6)
    _common(p)

    p = sub.add_parser("find-abelian", help="search abelian relative structures")
    _pres_arg(p)
    p.add_argument("--n-max", type=int, default=1)
    p.add_argument("--k-max", type=int, default=2)
    p.add_argument("--s-max", type=int, default=2)
    p.add_argument("--budget", type=int, default=None, help="candidates to try")
    p.add_argument("--recognize-k-max", type=int, default=10 ** 6)
    _recog_args(p)
    _common(p)
    return top


# -- helpers ------------------------------------------------------------------------------------

def _config_echo(rep: Report, ns) -> None:
    skip = {"report", "timing", "verbose"}
    for k in sorted(vars(ns)):
        if k not in skip and getattr(ns, k) is not None:
            rep.add(f"config.{k}", getattr(ns, k))


def _load(ns):
    return load_presentation(ns.presentation)


def _family(ns, pres):
    if ns.wp:
        return ns.wp
    if not pres.relators and pres.q == 0:
        return "builtin:free"
    raise MalformedInput("this command needs --wp for a presentation with relators")


def _recog_config(ns) -> RecognitionConfig:
    cfg = RecognitionConfig()
    for attr, name in (("cap", "cell_cap"), ("max_diagrams", "max_diagrams"), ("product_cap", "product_cap"),
                       ("polygon_cap", "polygon_cap"), ("exact_len", "exact_len"),
                       ("verify_length", "verify_length")):
        if getattr(ns, attr, None) is not None:
            setattr(cfg, name, getattr(ns, attr))
    return cfg


def _constants(ns):
    if ns.toy:
        return toy_constants(theta=ns.theta, L=ns.L, L1=ns.L1, L2=ns.L2, L2p=ns.L2p,
                             delta=ns.delta, M=ns.M, D=ns.fellow)
    return derive_constants(ns.delta, ns.M, ns.fellow)


def _cache_path(kind: str, *parts) -> Path | None:
    root = os.environ.get("RHKIT_CACHE_DIR")
    if not root:
        return None
    h = hashlib.sha256("\0".join(str(p) for p in parts).encode()).hexdigest()
    return Path(root) / f"{kind}-{h}.txt"


def _render_witness(pres, witness: dict) -> str:
    out = []
    for k in sorted(witness):
        v = witness[k]
        out.append(f"{k}:{pres.render_word(v) if isinstance(v, tuple) else v}")
    return " ".join(out)


# -- commands -------------------------------------------------------------------------------------

def cmd_graph(ns, rep: Report) -> str:
    if ns.action == "explore":
        pres = _load(ns)
        model = ConedGraph(pres, _family(ns, pres), cone_radius=ns.cone_budget or 2)
        frag = explore(model, ns.radius)
        Path(ns.out).write_text(frag.serialize(), encoding="utf-8")
        rep.add("vertices", len(frag))
        rep.add("edges", len(frag.labels))
        rep.add("truncated", int(frag.truncated))
        return "ok"
    frag = parse_fragment(Path(ns.fragment).read_text(encoding="utf-8"))
    if ns.action == "angle":
        rep.add("angle", angle(frag, ns.vertex, ns.u1, ns.u2, ns.cutoff))
    elif ns.action == "cone":
        rep.add("cone", " ".join(map(str, cone(frag, (ns.tail, ns.head), ns.rho, ns.theta))))
    else:
        rep.add("sector", " ".join(map(str, sector(frag, ns.parabolic, ns.theta))))
    return "ok"


def cmd_lang(ns, rep: Report) -> str:
    pres = _load(ns)
    if ns.action == "accept":
        aut = parse_automaton(Path(ns.automaton).read_text(encoding="utf-8"), pres)
        a = pres.fp.parse(ns.element)
        for c in aut.caveats:
            rep.add("caveat", c)
        return "accept" if gnr_accepts(aut, a, pres.fp) else "reject"
    consts = _constants(ns)
    rep.add("constants", consts.describe())
    if consts.caveat():
        rep.add("caveat", consts.caveat())
    model = ConedGraph(pres, _family(ns, pres))
    sectors = SectorTable(model)
    if ns.action == "build-L":
        aut = build_L_automaton(model, consts, sectors, ns.max_states)
        Path(ns.out).write_text(aut.serialize(pres), encoding="utf-8")
        rep.add("states", aut.n_states)
        rep.add("transitions", len(aut.transitions))
        return "ok"
    for a in compute_L0(model, consts, sectors):
        rep.add("element", pres.fp.render(a) or "1")
    return "ok"


def cmd_solve(ns, rep: Report) -> str:
    pres = _load(ns)
    system = parse_system(Path(ns.system).read_text(encoding="utf-8"), pres)
    if ns.mode == "va":
        if not ns.va_spec:
            raise MalformedInput("--mode va needs --va-spec")
        va = parse_va_spec(Path(ns.va_spec).read_text(encoding="utf-8"), pres)
        res = va_decide(system, va)
    else:
        family = _family(ns, pres)
        wp = group_wp(pres, family)
        tri = triangulate(system, lambda v: word_inverse(v, pres.inv))
        consts = _constants(ns)
        model = ConedGraph(pres, family)
        sectors = SectorTable(model)
        L = build_L_automaton(model, consts, sectors)
        if pres.q == 0:
            nf = family_oracles(family, pres.generators)[1]
            L0 = compute_L0(model, consts, sectors)
            lifting = LiftingData("hyperbolic", enumerate_central_triples(pres, ns.triple_bound, nf=nf), {},
                                  L, subtract_finite(L, L0, pres.fp), [])
        else:
            reps = {p: enumerate_param_reps(v, 1, 0, model) for p, v in tri.params.items()}
            lifting = LiftingData("relative", enumerate_central_triples(
                pres, ns.triple_bound, "relative", sectors, ns.triple_bound,
                nf=lambda w: model.canon(pres.to_X_word(w))), reps,
                L, lambda a: not a.is_identity())
        if consts.caveat():
            lifting.caveats.append(consts.caveat())
        res = decide_existential(tri, pres, wp, lifting, Budget.of(ns.budget), ns.max_members)
    if res.witness:
        rep.add("witness", _render_witness(pres, res.witness))
    if res.note:
        rep.add("note", res.note)
    for c in res.caveats:
        rep.add("caveat", c)
    return res.status


def cmd_recognize(ns, rep: Report) -> str:
    pres = _load(ns)
    wp = group_wp(pres, ns.wp) if ns.wp else None
    r = recognize(pres, wp, ns.k_start, ns.k_max, _recog_config(ns))
    rep.add("K", r.K)
    if r.counterexample is not None:
        rep.add("counterexample", pres.render_word(r.counterexample))
    if r.reason:
        rep.add("reason", r.reason)
    for t in r.trace:
        rep.add("trace.K", f"{t.K} V={sum(t.V)} Vp={sum(t.Vp)} C={t.C} D={t.D} W={t.W} maxratio={t.maxratio}")
    for w in r.witnesses:
        rep.add("witness", f"{pres.render_word(w.word)} area={w.area} length={w.length} {w.note}".rstrip())
    rep.add("verified_length", r.verified_length)
    for c in r.caveats:
        rep.add("caveat", c)
    return r.outcome


def cmd_loops(ns, rep: Report) -> str:
    pres = _load(ns)
    cfg = _recog_config(ns)
    cache = _cache_path("loops", presentation_text(pres), ns.k, ns.length, ns.wp, sorted(vars(cfg).items()))
    if cache is not None and cache.exists():
        rep.entries += parse_report(cache.read_text(encoding="utf-8")).entries
        return "ok"
    wp = group_wp(pres, ns.wp) if ns.wp else None
    res = simple_loop_list(pres, ns.k, ns.length, wp, config=cfg)
    body = Report()
    body.add("count", len(res.loops))
    for w in res.loops:
        body.add("loop", pres.render_word(w))
    if res.partial:
        body.add("caveat", "partial: diagram enumeration hit its cap")
    for c in cfg.caveats(ns.k):
        body.add("caveat", c)
    if cache is not None:
        cache.parent.mkdir(parents=True, exist_ok=True)
        cache.write_text(body.emit(), encoding="utf-8")
    rep.entries += body.entries
    return "ok"


def cmd_delta(ns, rep: Report) -> str:
    pres = _load(ns)
    h = hyperbolicity_constant(ns.k, pres, ns.coefficient)
    rep.add("rho", h.rho)
    rep.add("delta_cayley", h.delta_cayley)
    rep.add("delta_coned", h.delta_coned)
    rep.add("formula", h.formula)
    rep.add("caveat", "formula is configuration, not a sharp constant")
    return "ok"


def cmd_find(ns, rep: Report) -> str:
    pres = _load(ns)
    wp = group_wp(pres, _family(ns, pres))
    res = find_abelian_structure(pres, wp, ns.n_max, ns.k_max, ns.s_max, ns.recognize_k_max,
                                 _recog_config(ns), budget=ns.budget)
    for c in res.tried:
        fam = "; ".join(",".join(f"{pres.render_word(w)}^{t or 'inf'}" for w, t in sub) for sub in c.families)
        rep.add("candidate", f"n={c.n} k={c.k} s={c.s} family=[{fam}] outcome={c.outcome} K={c.K}")
    if res.presentation is not None:
        rep.add("K", res.report.K)
        rep.add("presentation", presentation_text(res.presentation))
        for c in res.report.caveats:
            rep.add("caveat", c)
    return res.status


COMMANDS = {"graph": cmd_graph, "lang": cmd_lang, "solve": cmd_solve, "recognize": cmd_recognize,
            "loops": cmd_loops, "delta": cmd_delta, "find-abelian": cmd_find}


def dispatch(argv) -> tuple:
    """Run one command; returns (exit code, Report)."""
    rep = Report()
    rep.add("tool", f"rhkit {__version__}")
    try:
        ns = build_parser().parse_args(list(argv))
    except UsageError as e:
        rep.add("outcome", "error")
        rep.add("error", str(e))
        return 1, rep
    rep.add("command", " ".join(x for x in (ns.command, getattr(ns, "action", None)) if x))
    _config_echo(rep, ns)
    t0 = time.perf_counter()
    try:
        outcome = COMMANDS[ns.command](ns, rep)
    except (MalformedInput, Unsupported, ContractViolation, OSError, ValueError) as e:
        rep.add("outcome", "error")
        rep.add("error", f"{type(e).__name__}: {e}")
        return 1, rep
    except (BudgetExceeded, VocabularyCapExceeded) as e:
        outcome = "Unknown"
        rep.add("note", f"budget: {e}")
    rep.entries.insert(2, ("outcome", outcome))
    if ns.timing:
        rep.add("timing", f"{time.perf_counter() - t0:.3f}")
    return (0 if outcome in DEFINITE else 2), rep


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    code, rep = dispatch(argv)
    path = None
    if "--report" in argv:
        i = list(argv).index("--report")
        path = argv[i + 1] if i + 1 < len(argv) else None
    if rep.outcome == "error":
        sys.stderr.write(rep.get("error", "") + "\n")
    emit_report(rep, path)
    return code


if __name__ == "__main__":
    sys.exit(main())
