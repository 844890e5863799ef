"""Command-line entry point: ``capnorm {nu,analyze,tower,simulate,convert}``.

Exit status is 0 on success (a silent criterion is still a success), 1 on
data or validation errors and 2 on usage errors. ``--format canonical``
switches every subcommand to JSON on stdout.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from fractions import Fraction
from pathlib import Path

from .errors import CanonicalizationWarning, CapnormError
from .heuristics import SimulationConfig, simulate
from .ingest import load, to_canonical
from .normpoly import build_nu, decompose, program_output
from .pmodule import Kind, filtration, invariants, verdict_line
from .tower import GenusLedger, analyze_tower, layer_verdict

_COLORS = {Kind.COMPLETE: "32", Kind.PARTIAL: "33", Kind.NONE: "31"}


def _use_color(stream) -> bool:
    mode = os.environ.get("CAPNORM_COLOR", "auto").lower()
    if mode == "always":
        return True
    if mode == "never":
        return False
    if mode != "auto":
        raise CapnormError(f"CAPNORM_COLOR must be auto, always or never, not {mode!r}")
    return hasattr(stream, "isatty") and stream.isatty()


class _Out:
    def __init__(self, stream, color: bool):
        self.stream = stream
        self.color = color

    def line(self, text: str = "") -> None:
        self.stream.write(text + "\n")

    def verdict(self, kind: Kind, text: str) -> None:
        if self.color:
            text = f"\x1b[{_COLORS[kind]}m{text}\x1b[0m"
        self.line(text)


def _json(out: _Out, data) -> None:
    out.line(json.dumps(data, sort_keys=True, default=_jsonable))


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, Kind):
        return x.value
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise CapnormError(f"cannot read {path}: {exc.strerror}") from exc


def _verdict_dict(v) -> dict | None:
    if v is None:
        return None
    return {
        "kind": v.kind.value,
        "rule": v.rule.value,
        "image_order": v.image_order,
        "kernel_order": v.kernel_order,
        "witnesses": [list(w) for w in v.witnesses],
    }


# subcommands -------------------------------------------------------------------

def cmd_nu(args, out: _Out) -> int:
    ks = [args.k] if args.k is not None else None
    if args.format == "canonical":
        nu = build_nu(args.p, args.N)
        decs = [decompose(nu, k) for k in (ks or range(1, args.p**args.N))]
        _json(out, {
            "p": args.p, "N": args.N, "coefficients": nu.ints(), "text": str(nu),
            "decompositions": [
                {"k": d.k, "f": d.f_k, "A": list(d.A), "B": list(d.B), "lines": d.lines()}
                for d in decs
            ],
        })
        return 0
    for ln in program_output(args.p, args.N, ks):
        out.line(ln)
    return 0


def cmd_analyze(args, out: _Out) -> int:
    tower = load(_read(args.file), args.input_format, args.prime)
    rec = tower.layer(args.layer)
    if rec.module is None:
        raise CapnormError(f"layer {args.layer} carries no action data")
    mod = rec.module
    filt = filtration(mod)
    inv = invariants(mod)
    v = layer_verdict(tower, rec)
    line = verdict_line(v.kind, rec.n, inv.m, inv.e)
    if args.format == "canonical":
        _json(out, {
            "layer": rec.n, "p": mod.p, "N": mod.N, "orders": list(mod.orders),
            "order": inv.order, "p_rank": inv.p_rank, "m": inv.m, "e": inv.e, "s": inv.s,
            "filtration": list(filt.subgroup_orders), "quotients": list(filt.quotient_orders),
            "verdict": _verdict_dict(v), "line": line,
        })
        return 0
    p = mod.p
    out.line(f"layer K{rec.n}: p={p} N={mod.N} type {list(mod.orders)}")
    out.line(f"order p^{inv.order}, p-rank {inv.p_rank}, e={inv.e}, m={inv.m}, s={inv.s}")
    out.line("filtration #H^i: " + " ".join(f"p^{o}" for o in filt.subgroup_orders))
    out.line("quotients #(H^(i+1)/H^i): " + " ".join(f"p^{o}" for o in filt.quotient_orders))
    out.verdict(v.kind, line)
    detail = f"rule {v.rule.value}"
    if v.image_order is not None:
        detail += f", J(H_K) of order p^{v.image_order}"
    if v.kernel_order is not None:
        detail += f", kernel p^{v.kernel_order}"
    out.line(detail)
    return 0


_LEDGER_KEYS = {"hK", "ram_order", "unit_quotient", "norm_index", "n", "r", "j_image", "jram_order"}


def parse_ledgers(text: str) -> list[GenusLedger]:
    """One ledger per non-blank line of ``key=value`` pairs; ``#`` starts a comment."""
    out = []
    for no, raw in enumerate(text.splitlines(), 1):
        ln = raw.split("#", 1)[0].strip()
        if not ln:
            continue
        fields = {}
        for tok in ln.split():
            key, sep, val = tok.partition("=")
            if not sep or key not in _LEDGER_KEYS:
                raise CapnormError(f"ledger line {no}: bad field {tok!r}")
            try:
                fields[key] = int(val)
            except ValueError:
                raise CapnormError(f"ledger line {no}: {key} is not an integer") from None
        try:
            out.append(GenusLedger(**fields))
        except TypeError:
            raise CapnormError(f"ledger line {no}: missing fields") from None
    return out


def cmd_tower(args, out: _Out) -> int:
    tower = load(_read(args.file), args.input_format, args.prime)
    ledgers = parse_ledgers(_read(args.ledger)) if args.ledger else []
    rep = analyze_tower(tower, ledgers)
    seq = tower.order_sequence()
    pred = rep.prediction
    if args.format == "canonical":
        _json(out, {
            "p": tower.p, "N": tower.N, "orders": seq,
            "layers": [
                {"n": lr.n, "order": lr.order,
                 "m": lr.invariants.m if lr.invariants else None,
                 "e": lr.invariants.e if lr.invariants else None,
                 "verdict": _verdict_dict(lr.verdict), "printed": lr.printed}
                for lr in rep.layers
            ],
            "stability_index": rep.stability,
            "schedule": [list(s) for s in pred.schedule] if pred else None,
            "complete_layer": pred.complete_layer if pred else None,
            "norm_checks": [
                {"n": c.n, "status": c.status, "note": c.note,
                 "mismatches": [[j, list(a), list(b)] for j, a, b in c.mismatches]}
                for c in rep.norm_checks
            ],
            "growth": [{"n": g.n, "h": g.h, "lhs": g.lhs, "rhs": g.rhs} for g in rep.growth],
            "iwasawa": None if rep.fit is None else {
                "lambda": rep.fit.lam, "mu": rep.fit.mu, "nu": rep.fit.nu,
                "residuals": list(rep.fit.residuals), "flags": rep.fit.flags(),
            },
            "ledgers": [{"ok": c.ok, "residual": c.residual, "lhs": c.lhs, "rhs": c.rhs, "note": c.note}
                        for _, c in rep.ledgers],
        })
        return 0
    out.line(f"tower p={tower.p} N={tower.N}" + (f" ({tower.tag})" if tower.tag else ""))
    out.line("orders v_p #H_K(n): " + " ".join(map(str, seq)))
    for lr in rep.layers:
        if lr.verdict is None:
            out.line(f"K{lr.n}: order p^{lr.order}, no action data")
            continue
        if lr.invariants is not None:
            line = verdict_line(lr.verdict.kind, lr.n, lr.invariants.m, lr.invariants.e)
        else:
            line = f"{lr.verdict.kind.value} capitulation in K{lr.n}"
        out.verdict(lr.verdict.kind, f"K{lr.n}: {line} [{lr.verdict.rule.value}]")
        if lr.printed and lr.printed != line and lr.invariants is not None:
            out.line(f"    printed: {lr.printed}")
    if rep.stability is None:
        out.line("stability: orders grow on every step")
    else:
        out.line(f"stability index n0={rep.stability}")
        sched = ", ".join(f"H_K[p^{e}] in K{n}" for e, n in pred.schedule)
        out.line(f"schedule: {sched}")
        if pred.complete_layer is not None:
            out.line(f"complete capitulation predicted in K{pred.complete_layer}")
        else:
            out.line("complete capitulation layer lies beyond the tower")
        out.line(f"note: {pred.caveat}")
    for c in rep.norm_checks:
        out.line(f"norms K{c.n}: {c.status}" + (f" ({c.note})" if c.note else ""))
        for j, printed, got in c.mismatches:
            out.line(f"    component {j}: printed {list(printed)}, computed {list(got)}")
    bad = [g for g in rep.growth if g.slack < 0]
    out.line(f"growth rows: {len(rep.growth)}, violations: {len(bad)}")
    for g in bad:
        out.line(f"    n={g.n} h={g.h}: p^{g.lhs} < p^{g.rhs}")
    if rep.fit is not None:
        f = rep.fit
        out.line(f"iwasawa fit: lambda={f.lam} mu={f.mu} nu={f.nu}; residuals "
                 + " ".join(str(r) for r in f.residuals))
        for flag in f.flags():
            out.line(f"    {flag}")
    for lg, c in rep.ledgers:
        out.line(f"ledger n={lg.n}: lhs p^{c.lhs}, rhs p^{c.rhs}, residual {c.residual}"
                 + (f" ({c.note})" if c.note else ""))
    return 0


def cmd_simulate(args, out: _Out) -> int:
    cfg = SimulationConfig(p=args.p, N=args.N, r=args.r, hK_valuation=args.hk,
                           trials=args.trials, seed=args.seed, offset=args.offset)
    rep = simulate(cfg)
    if args.format == "canonical":
        out.line(rep.to_json())
    else:
        out.stream.write(rep.text())
    return 0


def cmd_convert(args, out: _Out) -> int:
    tower = load(_read(args.input), args.source, args.prime)
    text = to_canonical(tower)
    if args.output == "-":
        out.stream.write(text)
    else:
        Path(args.output).write_text(text)
    return 0


# parser -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="capnorm",
                                     description="Capitulation analysis in cyclic p-extensions.")
    parser.add_argument("--format", choices=("text", "canonical"), default="text",
                        help="report style (canonical emits JSON)")
    # repeated on each subcommand so the flag may follow it
    fmt = argparse.ArgumentParser(add_help=False)
    fmt.add_argument("--format", choices=("text", "canonical"), default=argparse.SUPPRESS,
                     help="report style (canonical emits JSON)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("nu", parents=[fmt], help="print the algebraic norm and its decompositions")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--k", type=int)
    p.set_defaults(func=cmd_nu)

    def data_opts(sp):
        sp.add_argument("--file", required=True)
        sp.add_argument("--input-format", choices=("transcript", "canonical"))
        sp.add_argument("--prime", type=int, help="override the prime read from the file")

    p = sub.add_parser("analyze", parents=[fmt], help="analyze one layer of a tower file")
    data_opts(p)
    p.add_argument("--layer", type=int, required=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("tower", parents=[fmt], help="audit a whole tower file")
    data_opts(p)
    p.add_argument("--ledger", help="file of genus ledger lines (key=value)")
    p.set_defaults(func=cmd_tower)

    p = sub.add_parser("simulate", parents=[fmt], help="run the CP-1 Monte Carlo model")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--hk", type=int, required=True, help="v_p of #H_K")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--offset", type=int, default=0, help="index of the first trial")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("convert", parents=[fmt], help="rewrite a tower file in canonical form")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True, help="path, or - for stdout")
    p.add_argument("--from", dest="source", choices=("transcript", "canonical"))
    p.add_argument("--to", dest="target", choices=("canonical",), default="canonical")
    p.add_argument("--prime", type=int)
    p.set_defaults(func=cmd_convert)
    return parser


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout if stdout is not None else sys.stdout
    stderr = stderr if stderr is not None else sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        out = _Out(stdout, _use_color(stdout))
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", CanonicalizationWarning)
            status = args.func(args, out)
        for w in caught:
            stderr.write(f"capnorm: warning: {w.message}\n")
        return status
    except (CapnormError, ValueError) as exc:
        stderr.write(f"capnorm: error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
