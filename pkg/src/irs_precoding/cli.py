"""Command-line entry point: ``irs-precoding {design,sweep,oracle}``.

Exit codes: 0 success, 2 configuration error, 3 runtime or solver failure.
"""

import argparse
import json
import math
import sys

import numpy as np

from .codebook import design_codebooks, parse_scheme
from .discrete import bnb_solve_1bit, build_onebit_instance, quantize_phases
from .margin import realify, rotated_received, margin_objective
from .mimo import alternating_design, combiner_vectors, solve_combiner
from .oracles import combiner_grid_search, exhaustive_onebit
from .rcg import solve_relaxed
from .signals import DomainError, make_constellation, phase_alphabet, sample_channels, substream, symbol_table
from .sweep import ConfigError, SweepConfig, run_sweep

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


def _complex_list(a):
    return [[float(z.real), float(z.imag)] for z in np.ravel(a)]


def cmd_design(args):
    const = make_constellation(args.M)
    scheme = parse_scheme(args.scheme)
    channels = sample_channels(args.N, args.K, args.Nr, stream=substream(args.seed, "channel", 0))
    digits, _ = symbol_table(const, args.K)
    doc = {
        "M": args.M, "K": args.K, "N": args.N, "Nr": args.Nr, "seed": args.seed,
        "scheme": scheme.name,
        "symbol_index_digits": "least significant base-M digit = user 1",
    }
    if args.Nr == 1:
        book = design_codebooks(channels.h, const, [scheme], seed=args.seed, key=(0,))[scheme.name]
        W = None
    else:
        book, W, trace = alternating_design(channels, const, scheme, seed=args.seed, key=(0,))
        doc["alternating_objective"] = trace.objective
        doc["combiners"] = [_complex_list(w) for w in W]
    doc["entries"] = [
        {"m": m + 1, "digits": [int(d) for d in digits[m]], "margin": float(book.margins[m]),
         "theta": _complex_list(book.entries[m])}
        for m in range(book.size)
    ]
    doc["channels"] = [[_complex_list(col) for col in Hk.T] for Hk in channels.H]
    text = json.dumps(doc, indent=2)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


def cmd_sweep(args):
    cfg = SweepConfig.from_json(args.config)
    if args.output:
        cfg.output = args.output
    run_sweep(cfg, threads=args.threads, progress=sys.stderr)
    return EXIT_OK


def _oracle_bnb(args, rng_seed):
    const = make_constellation(args.M)
    _, S = symbol_table(const, args.K)
    out = []
    for t in range(args.trials):
        ch = sample_channels(args.N, args.K, 1, stream=substream(rng_seed, "oracle", 1, t))
        m = t % S.shape[0]
        inst = build_onebit_instance(ch.h, S[m], const.phi)
        sol = solve_relaxed(ch.h, S[m], const.phi, rng=substream(rng_seed, "precoder", t, m))
        q = quantize_phases(sol.theta, phase_alphabet(1))
        res = bnb_solve_1bit(inst, q)
        _, best = exhaustive_onebit(inst)
        out.append({"trial": t, "bnb": res.value, "exhaustive": best, "quantized": inst.objective(q.real),
                    "nodes": res.nodes, "status": res.status, "match": res.value == best})
    return out


def _oracle_combiner(args, rng_seed):
    const = make_constellation(args.M)
    _, S = symbol_table(const, args.K)
    out = []
    for t in range(args.trials):
        ch = sample_channels(args.N, args.K, 2, stream=substream(rng_seed, "oracle", 2, t))
        book, W, _ = alternating_design(ch, const, "inf", seed=rng_seed, key=(t,), max_iter=0)
        k = t % args.K
        C = combiner_vectors(ch.H[k], book.entries, S[:, k])
        _, v, _ = solve_combiner(ch.H[k], book.entries, S[:, k], const.phi)
        grid, _ = combiner_grid_search(C, const.phi, step=args.step)
        out.append({"trial": t, "solver": v, "grid": grid, "difference": v - grid})
    return out


def _oracle_realify(args, rng_seed):
    rng = substream(rng_seed, "oracle", 3)
    const = make_constellation(args.M)
    worst = 0.0
    for _ in range(args.trials):
        h = (rng.standard_normal(args.N) + 1j * rng.standard_normal(args.N)) / math.sqrt(2)
        theta = np.exp(1j * rng.uniform(0, 2 * np.pi, args.N))
        s = const.points[rng.integers(const.M)]
        odd, even = realify(h, s, const.phi)
        ref = margin_objective(rotated_received(h, theta, s), const.phi)
        worst = max(worst, abs(max(odd(theta), even(theta)) - ref))
    return [{"trials": args.trials, "max_abs_error": worst}]


def cmd_oracle(args):
    fn = {"bnb": _oracle_bnb, "combiner": _oracle_combiner, "realify": _oracle_realify}[args.kind]
    for row in fn(args, args.seed):
        print(json.dumps(row))
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="irs-precoding", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("design", help="design a codebook for one random channel draw")
    d.add_argument("--N", type=int, default=16)
    d.add_argument("--K", type=int, default=2)
    d.add_argument("--M", type=int, default=4)
    d.add_argument("--Nr", type=int, default=1)
    d.add_argument("--scheme", default="inf", help="inf, 1..8 or 1-bnb")
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--output", "-o", help="JSON file (default: stdout)")
    d.set_defaults(func=cmd_design)

    s = sub.add_parser("sweep", help="run an SER sweep described by a JSON config")
    s.add_argument("config")
    s.add_argument("--output", "-o", help="override the CSV path of the config")
    s.add_argument("--threads", type=int, help="worker processes (default: $IRS_PRECODING_THREADS or all cores)")
    s.set_defaults(func=cmd_sweep)

    o = sub.add_parser("oracle", help="compare solvers with brute-force references")
    o.add_argument("kind", choices=["bnb", "combiner", "realify"])
    o.add_argument("--N", type=int, default=8)
    o.add_argument("--K", type=int, default=2)
    o.add_argument("--M", type=int, default=4)
    o.add_argument("--trials", type=int, default=5)
    o.add_argument("--step", type=float, default=0.01, help="grid spacing for the combiner oracle")
    o.add_argument("--seed", type=int, default=0)
    o.set_defaults(func=cmd_oracle)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
