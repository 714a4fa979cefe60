"""Command-line entry point: ``specious mine | detect | synth``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 unrealizable synth spec.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

from .dataset import DataError, load, write_csv, write_fimi
from .miner import MinerConfig, mine_top_k, rank_key
from .report import read_rules, summarize, write_report, write_rules
from .specdetect import spec_detect
from .synthgen import PlantSpec, UnrealizableSpec, plant_equivalent, plant_simpson, write_truth

log = logging.getLogger("specious")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_SPEC = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive(v: str) -> int:
    i = int(v)
    if i < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return i


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="specious", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def data_flags(sp):
        sp.add_argument("--input", required=True, help="dataset file")
        sp.add_argument("--format", choices=("fimi", "csv"),
                        help="input format (default: from the file extension)")

    def mining_flags(sp):
        sp.add_argument("--top-k", type=_positive, default=100)
        sp.add_argument("--max-antecedent", type=_positive)
        sp.add_argument("--consequents", help="comma-separated attribute names")
        sp.add_argument("--polarity", choices=("both", "positive"), default="both")

    m = sub.add_parser("mine", help="mine the top-K dependency rules")
    data_flags(m)
    mining_flags(m)
    m.add_argument("--output", required=True, help="rule file (TSV)")
    m.add_argument("--summary", help="optional run summary (JSON)")
    m.add_argument("--threads", type=_positive, default=1)

    d = sub.add_parser("detect", help="classify mined rules as specious or not")
    data_flags(d)
    d.add_argument("--rules", help="rule file from `mine`; mined on the fly when absent")
    mining_flags(d)
    d.add_argument("--theta", type=float, default=0.5)
    d.add_argument("--alpha", type=float, default=0.05)
    d.add_argument("--output", required=True, help="verdict report (TSV)")
    d.add_argument("--summary", help="run summary (JSON)")
    d.add_argument("--threads", type=_positive, default=1)

    s = sub.add_parser("synth", help="write a synthetic dataset and its ground truth")
    s.add_argument("--kind", choices=("simpson", "equiv"), default="simpson")
    s.add_argument("--output", required=True, help="dataset file")
    s.add_argument("--format", choices=("fimi", "csv"), help="output format")
    s.add_argument("--truth", help="ground-truth sidecar (default: OUTPUT.truth.json)")
    s.add_argument("--seed", type=int, default=0)
    base = PlantSpec()
    for name in ("n", "noise"):
        s.add_argument("--" + name.replace("_", "-"), type=int, default=getattr(base, name))
    for name in ("p_x", "q_given_x", "q_given_not_x", "c_given_x", "c_given_not_x",
                 "delta1", "delta2", "noise_density"):
        s.add_argument("--" + name.replace("_", "-"), type=float, default=getattr(base, name))
    s.add_argument("--input", help="[equiv] dataset to augment (default: a planted one)")
    s.add_argument("--input-format", choices=("fimi", "csv"))
    s.add_argument("--source", help="[equiv] attribute name to duplicate")
    s.add_argument("--mode", choices=("copy", "complement"), default="copy")
    return p


def _fmt(path, fmt):
    return fmt or ("csv" if str(path).lower().endswith(".csv") else "fimi")


def _miner_config(args, d) -> MinerConfig:
    cons = None
    if args.consequents:
        try:
            cons = tuple(d.index(nm.strip()) for nm in args.consequents.split(",") if nm.strip())
        except KeyError as e:
            raise DataError(str(e)) from None
    return MinerConfig(k=args.top_k, max_antecedent=args.max_antecedent, consequents=cons,
                       polarity_mode=args.polarity)


def _config_echo(args) -> dict:
    skip = {"command", "verbose", "func"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def cmd_mine(args) -> int:
    t0 = time.perf_counter()
    d = load(args.input, _fmt(args.input, args.format))
    t1 = time.perf_counter()
    top = mine_top_k(d, _miner_config(args, d))
    t2 = time.perf_counter()
    write_rules(top.rules, d.names, args.output)
    if top.boundary_tie:
        log.warning("rule ranked %d ties the first excluded rule on M", top.k)
    if args.summary:
        summ = summarize([], d, _config_echo(args), boundary_tie=top.boundary_tie,
                         timings={"load_s": t1 - t0, "mine_s": t2 - t1})
        summ.counts = {}
        summ.proportions = {}
        summ.write(args.summary)
    print(f"wrote {len(top)} rules to {args.output}")
    return EXIT_OK


def cmd_detect(args) -> int:
    t0 = time.perf_counter()
    d = load(args.input, _fmt(args.input, args.format))
    t1 = time.perf_counter()
    tie = None
    if args.rules:
        rules = read_rules(args.rules, d)
        keys = [rank_key(r) for r in rules]
        if any(not a < b for a, b in zip(keys, keys[1:])):
            raise DataError(f"{args.rules}: rules are not in rank order for this dataset")
    else:
        top = mine_top_k(d, _miner_config(args, d))
        rules, tie = top.rules, top.boundary_tie
    t2 = time.perf_counter()
    results = spec_detect(rules, d, theta=args.theta, alpha=args.alpha, threads=args.threads)
    t3 = time.perf_counter()
    write_report(results, d.names, args.output)
    summ = summarize(results, d, _config_echo(args), alpha=args.alpha, boundary_tie=tie,
                     timings={"load_s": t1 - t0, "mine_s": t2 - t1, "detect_s": t3 - t2})
    if args.summary:
        summ.write(args.summary)
    print(f"{len(results)} rules, {summ.proportions['specious']:.1%} specious "
          f"({', '.join(f'{k}={v}' for k, v in summ.counts.items())})")
    return EXIT_OK


def cmd_synth(args) -> int:
    spec = PlantSpec(n=args.n, p_x=args.p_x, q_given_x=args.q_given_x,
                     q_given_not_x=args.q_given_not_x, c_given_x=args.c_given_x,
                     c_given_not_x=args.c_given_not_x, delta1=args.delta1, delta2=args.delta2,
                     noise=args.noise, noise_density=args.noise_density, seed=args.seed)
    if args.kind == "simpson":
        d, truth = plant_simpson(spec)
    else:
        if args.input:
            d = load(args.input, args.input_format)
        else:
            d, _ = plant_simpson(spec)
        try:
            src = d.index(args.source) if args.source else 0
        except KeyError as e:
            raise DataError(str(e)) from None
        d, truth = plant_equivalent(d, src, args.mode)
        truth["seed"] = args.seed
    fmt = _fmt(args.output, args.format)
    (write_csv if fmt == "csv" else write_fimi)(d, args.output)
    truth["format"] = fmt
    truth_path = args.truth or str(Path(args.output)) + ".truth.json"
    write_truth(truth, truth_path)
    print(f"wrote {d.n}x{d.k} dataset to {args.output}, ground truth to {truth_path}")
    return EXIT_OK


COMMANDS = {"mine": cmd_mine, "detect": cmd_detect, "synth": cmd_synth}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UnrealizableSpec as e:
        print(f"specious: unrealizable spec: {e}", file=sys.stderr)
        return EXIT_SPEC
    except (DataError, ValueError, KeyError) as e:
        print(f"specious: data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except OSError as e:
        print(f"specious: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
