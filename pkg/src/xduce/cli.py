"""Command-line interface: ``xduce {build,score,next,decompose,sample,eval,check}``."""

import argparse
import csv
import json
import logging
import math
import os
import random
import sys
import time

from . import builders
from .errors import DeadEnd, NonTerminationError, UsageError
from .finiteness import check_safety
from .fst import EPS, FstError, apply, compose, dumps, load_fst_text, show, trim
from .lm import EOS, GeometricUniformLm, load_lm
from .metrics import bootstrap_ci, jsd, surprisal_bits
from .transduced import TransducedLm, fast_path_eligible

log = logging.getLogger("xduce")

BUILTINS = {
    "lowercase": builders.build_lowercase,
    "dna2aa": builders.build_dna2aa,
    "newspeak": builders.build_newspeak,
    "showcase": builders.build_safety_showcase,
    "segmenter": builders.build_delimiter_segmenter,
    "comma": builders.build_comma_rule,
}

CSV_FIELDS = ["kind", "line", "position", "symbol", "value", "seconds", "q_size", "r_size",
              "fallbacks", "ci_low", "ci_high", "symbols_per_sec"]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def load_machine(desc):
    if desc.startswith("builtin:"):
        name = desc.split(":", 1)[1]
        if name not in BUILTINS:
            raise UsageError(f"unknown builtin {name!r}; choose from {', '.join(sorted(BUILTINS))}")
        return BUILTINS[name]()
    if desc.startswith("vocab:"):
        with open(desc.split(":", 1)[1], encoding="utf-8") as fh:
            return builders.build_token_to_byte(builders.read_vocab(fh))
    with open(desc, encoding="utf-8") as fh:
        return load_fst_text(fh)


def load_chain(machines):
    """Compose the machines left to right."""
    if not machines:
        raise UsageError("at least one --fst is required")
    f = load_machine(machines[0])
    for desc in machines[1:]:
        f = trim(compose(f, load_machine(desc)))
    return f


def load_source(desc, f):
    if desc is None:
        raise UsageError("--lm is required")
    if desc.startswith("geometric:"):
        return GeometricUniformLm(float(desc.split(":", 1)[1]), f.in_alphabet)
    if desc.lstrip().startswith("{"):
        return load_lm(json.loads(desc))
    return load_lm(desc)


def parse_target(text, alphabet):
    """Characters, or whitespace-separated labels when some label is longer
    than one character."""
    if any(len(b) != 1 for b in alphabet):
        return tuple(text.split())
    return tuple(text)


def sym(b):
    return "EOS" if b is EOS else b


def make_tlm(args, f=None, tau=None):
    f = load_chain(args.fst) if f is None else f
    lm = load_source(args.lm, f)
    return TransducedLm(f, lm, tau=args.tau if tau is None else tau, n_max=args.n_max, retries=args.retries,
                        tau_min=args.tau_min, d_max=args.d_max, fast_path=not args.no_fast_path)


def emit(obj, fmt, out):
    if fmt == "json":
        json.dump(obj, out, indent=2, sort_keys=True, default=str)
        out.write("\n")
        return True
    return False


def fmt_prob(p):
    lp = f"{math.log2(p):.6f}" if p > 0.0 else "-inf"
    return f"{p:.12g} (log2 {lp})"


# ---------------------------------------------------------------------------
# commands

def cmd_build(args, out):
    f = load_chain(args.fst)
    out.write(dumps(f))
    return 0


def cmd_score(args, out):
    tlm = make_tlm(args)
    y = parse_target(args.target, tlm.alphabet)
    report = tlm.score(y)
    report["target"] = show(y)
    report["tau"] = tlm.tau
    for row in report["symbols"]:
        if math.isinf(row["surprisal_bits"]):
            row["surprisal_bits"] = None
    if emit(report, args.format, out):
        return 0
    out.write(f"target      {show(y)}\n")
    out.write(f"prefix_prob {fmt_prob(report['prefix_prob'])}\n")
    out.write(f"prob        {fmt_prob(report['prob'])}\n")
    for row in report["symbols"]:
        s = "inf" if row["surprisal_bits"] is None else f"{row['surprisal_bits']:.6f}"
        out.write(f"  {row['position']:>4} {row['symbol']:<8} p={row['prob']:.12g} "
                  f"surprisal={s} bits deficit={row['deficit']:.3g}\n")
    if report["truncated"]:
        out.write("truncated: the target has no mass at the last reported position\n")
    out.write(f"retries     {report['retries']}\n")
    return 0


def cmd_next(args, out):
    tlm = make_tlm(args)
    y = parse_target(args.target, tlm.alphabet)
    dist = tlm.next_dist(y)
    items = sorted(dist.items(), key=lambda kv: (-kv[1], sym(kv[0])))
    total = math.fsum(dist.values())
    obj = {"target": show(y), "dist": {sym(k): v for k, v in items}, "sum": total,
           "deficit": max(0.0, 1.0 - total)}
    if emit(obj, args.format, out):
        return 0
    for k, v in items:
        out.write(f"{sym(k)}\t{v:.12g}\n")
    out.write(f"sum\t{total:.12g}\ndeficit\t{obj['deficit']:.3g}\n")
    return 0


def cmd_decompose(args, out):
    tlm = make_tlm(args)
    y = parse_target(args.target, tlm.alphabet)
    d = tlm.decompose(y)
    lm = tlm.lm
    q = sorted(d.quotient)
    r = sorted(d.remainder)
    obj = {
        "target": show(y),
        "exact": d.exact,
        "quotient": [{"x": show(x), "prefix_prob": lm.prefix_prob(x)} for x in q],
        "remainder": [{"x": show(x), "prob": lm.string_prob(x)} for x in r],
    }
    if emit(obj, args.format, out):
        return 0
    out.write(f"target {show(y)} ({'exact' if d.exact else 'pruned'})\n")
    out.write(f"Q ({len(q)})\n")
    for e in obj["quotient"]:
        out.write(f"  {e['x'] or 'ε'}\t{e['prefix_prob']:.12g}\n")
    out.write(f"R ({len(r)})\n")
    for e in obj["remainder"]:
        out.write(f"  {e['x'] or 'ε'}\t{e['prob']:.12g}\n")
    return 0


def cmd_sample(args, out):
    tlm = make_tlm(args)
    rng = random.Random(args.seed)
    for _ in range(args.n):
        x = tlm.sample_source(rng)
        y = apply(tlm.fst, x)
        if y is None:
            out.write(f"! off-domain source string {show(x)!r}\n")
        else:
            out.write(show(y) + "\n")
    return 0


def _eval_line(mode, tlm, ref, y, lineno, rows):
    """Append the per-position rows of one corpus line. Returns the number of
    positions processed, or None after a dead end."""
    positions = list(range(len(y) + (1 if mode == "xent" else 0)))
    for t in positions:
        b = y[t] if t < len(y) else EOS
        start = time.perf_counter()
        before = tlm.retries
        row = {"kind": "position", "line": lineno, "position": t, "symbol": sym(b)}
        try:
            if mode == "jsd":
                p = tlm.next_dist(y[:t])
                q = ref.next_dist(y[:t])
                row["value"] = jsd(p, q)
                if t < len(y) and p.get(b, 0.0) == 0.0:
                    tlm.conditional(y[:t], b)
            elif mode == "xent":
                dist = tlm.conditional(y[:t], b) if b is not EOS else tlm.next_dist(y)
                p = dist.get(b, 0.0)
                if p == 0.0:
                    raise DeadEnd(f"symbol {sym(b)!r} has no mass")
                row["value"] = surprisal_bits(p)
            else:
                d = tlm.decompose(y[: t + 1])
                row["value"] = len(d.quotient) + len(d.remainder)
        except DeadEnd as e:
            log.warning("line %d position %d: %s; line excluded", lineno, t, e)
            return None
        if mode != "size":
            d = tlm.decompose(y[:t])
        row["q_size"] = len(d.quotient)
        row["r_size"] = len(d.remainder)
        row["fallbacks"] = tlm.retries - before
        row["seconds"] = f"{time.perf_counter() - start:.6f}"
        rows.append(row)
    return len(y)


def cmd_eval(args, out):
    f = load_chain(args.fst)
    tlm = make_tlm(args, f)
    ref = None
    if args.mode == "jsd":
        if args.ref_tau is None:
            raise UsageError("jsd mode needs --ref-tau")
        if args.ref_tau > args.tau:
            raise UsageError("--ref-tau must not exceed --tau")
        ref = make_tlm(args, f, tau=args.ref_tau)
    with open(args.corpus, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    rows = []
    symbols = 0
    start = time.perf_counter()
    incomplete = 0
    for lineno, text in enumerate(lines, 1):
        if not text.strip():
            continue
        y = parse_target(text, tlm.alphabet)
        kept = []
        n = _eval_line(args.mode, tlm, ref, y, lineno, kept)
        if n is None:
            incomplete += 1
            continue
        rows += kept
        symbols += n
    elapsed = time.perf_counter() - start
    values = [r["value"] for r in rows]
    lo, hi = bootstrap_ci(values, seed=args.seed if args.seed is not None else 0)
    summary = {
        "kind": "summary",
        "line": incomplete,
        "value": math.fsum(values) / len(values) if values else math.nan,
        "ci_low": lo,
        "ci_high": hi,
        "fallbacks": tlm.retries,
        "symbols_per_sec": f"{symbols / elapsed:.3f}" if elapsed > 0 else "",
    }
    if args.format == "json":
        emit({"rows": rows, "summary": summary}, "json", out)
        return 0
    w = csv.DictWriter(out, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in rows + [summary]:
        w.writerow(r)
    return 0


def cmd_check(args, out):
    f = trim(load_chain(args.fst))
    report = check_safety(f)
    obj = report.to_dict()
    obj.update({
        "arcs": len(f.arcs),
        "ip_universal": len(report.universal),
        "non_universal_states": sorted(set(f.states) - report.universal),
        "fast_path_eligible": fast_path_eligible(f, report.universal),
        "eps_output_arcs_on_input": sum(1 for _, a, b, _ in f.arcs if a != EPS and b == EPS),
    })
    emit(obj, "json", out)
    return 0


COMMANDS = {
    "build": cmd_build,
    "score": cmd_score,
    "next": cmd_next,
    "decompose": cmd_decompose,
    "sample": cmd_sample,
    "eval": cmd_eval,
    "check": cmd_check,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--fst", action="append", default=[],
                        help="machine file, builtin:NAME or vocab:PATH; repeat to compose left to right")
    common.add_argument("--lm", help="model JSON file, inline JSON, or geometric:STOP")
    common.add_argument("--tau", type=float, default=0.0)
    common.add_argument("--n-max", type=int, default=None)
    common.add_argument("--retries", type=int, default=20)
    common.add_argument("--tau-min", type=float, default=1e-10)
    common.add_argument("--d-max", type=int, default=32)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--no-fast-path", action="store_true")
    common.add_argument("--ref-tau", type=float, default=None)
    common.add_argument("--format", choices=["text", "json", "csv"], default="text")

    p = _Parser(prog="xduce", description="Transduced language models from the command line.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("build", parents=[common], help="print the (composed) machine in text form")
    for name, helptext in (("score", "score a target string"),
                           ("next", "next-symbol distribution after a target prefix"),
                           ("decompose", "quotient and remainder of a target prefix")):
        sp = sub.add_parser(name, parents=[common], help=helptext)
        sp.add_argument("target", nargs="?", default="")
    sp = sub.add_parser("sample", parents=[common], help="draw target strings")
    sp.add_argument("-n", type=int, default=10)
    sp = sub.add_parser("eval", parents=[common], help="per-position evaluation as CSV")
    sp.add_argument("corpus")
    sp.add_argument("--mode", choices=["jsd", "xent", "size"], default="xent")
    sub.add_parser("check", parents=[common], help="finiteness and fast-path report (JSON)")
    return p


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    level = os.environ.get("XDUCE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if not 0.0 <= args.tau <= 1.0:
            raise UsageError("--tau must lie in [0, 1]")
        return COMMANDS[args.command](args, out)
    except DeadEnd as e:
        print(f"xduce: dead end: {e}", file=sys.stderr)
        return 2
    except NonTerminationError as e:
        print(f"xduce: {e}", file=sys.stderr)
        return 3
    except (UsageError, FstError, OSError, ValueError, KeyError) as e:
        print(f"xduce: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
