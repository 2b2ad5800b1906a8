"""Command-line entry point: ``strata {policy,curate,simulate,reconstruct,compare}``.

Exit status is 0 on success, 1 on bad input data and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import contextlib
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import column, curator, harness, reconstruct, tree
from .policies import ALGO_NAMES, enumerate_retained, parse_policy


class DataError(Exception):
    pass


@contextlib.contextmanager
def _open_in(path: str):
    if path == "-":
        yield sys.stdin
    else:
        try:
            fh = open(path)
        except OSError as err:
            raise DataError(f"cannot read {path}: {err.strerror}") from None
        with fh:
            yield fh


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)


def _policy_from(args, parser):
    try:
        if getattr(args, "policy", None):
            return parse_policy(args.policy)
        if args.algo is None or args.param is None:
            parser.error("give --policy ALGO:PARAM or both --algo and --param")
        return parse_policy(args.algo, args.param)
    except (TypeError, ValueError) as err:
        parser.error(str(err))


def _cmd_policy(args, parser):
    policy = _policy_from(args, parser)
    if args.timelapse is not None:
        if args.timelapse < 0:
            parser.error("--timelapse must be >= 0")
        lines = ["n,retained_count,retained"]
        for n in range(args.timelapse + 1):
            times = enumerate_retained(policy, n)
            lines.append(f"{n},{len(times)},{' '.join(map(str, times.tolist()))}")
        _write(args.out, "\n".join(lines) + "\n")
    else:
        if args.depth < 0:
            parser.error("--depth must be >= 0")
        times = enumerate_retained(policy, args.depth)
        _write(args.out, " ".join(map(str, times.tolist())) + "\n")


def _cmd_curate(args, parser):
    policy = _policy_from(args, parser)
    cur = curator.StreamCurator(policy)
    with _open_in(args.input) as fh:
        try:
            cur.extend(curator.read_observations(fh))
        except ValueError as err:
            raise DataError(str(err)) from None
    _write(args.out, "".join(line + "\n" for line in curator.write_observations(cur)))


def _replicate(job):
    config, out_dir = job
    result = harness.run_sim(config)
    harness.write_artifacts(result, out_dir)
    return out_dir


def _cmd_simulate(args, parser):
    policy = _policy_from(args, parser)
    try:
        base = harness.SimConfig(
            args.population_size, args.generations, policy,
            model=args.model, width=args.width, seed=args.seed,
        )
    except ValueError as err:
        parser.error(str(err))
    out = Path(args.out_dir)
    if args.replicates == 1:
        _replicate((base, out))
        return
    seeds = np.random.SeedSequence(args.seed).generate_state(args.replicates, dtype=np.uint64)
    jobs = [
        (harness.SimConfig(base.population_size, base.generations, policy,
                           base.model, base.width, int(s)), out / f"rep{i:03d}")
        for i, s in enumerate(seeds)
    ]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            list(pool.map(_replicate, jobs))
    else:
        for job in jobs:
            _replicate(job)


def _load_population(path: str) -> list[column.StratColumn]:
    with _open_in(path) as fh:
        try:
            cols = column.read_population(fh)
        except ValueError as err:
            raise DataError(str(err)) from None
    if not cols:
        raise DataError(f"{path}: empty population")
    return cols


def _cmd_reconstruct(args, parser):
    cols = _load_population(args.population)
    try:
        root, _ = reconstruct.build_trie(cols)
    except ValueError as err:
        raise DataError(str(err)) from None
    phylo = reconstruct.trie_to_tree(root, args.polytomy)
    if args.correct_bias:
        phylo = reconstruct.correct_origin_times(phylo, cols[0].width)
    out = args.out
    if out is None and args.out_dir:
        out = str(Path(args.out_dir) / "reconstruction.nwk")
    _write(out, tree.to_newick(phylo) + "\n")
    matrix_path = args.matrix
    if matrix_path is None and args.out_dir:
        matrix_path = str(Path(args.out_dir) / "mrca_matrix.csv")
    if matrix_path:
        matrix = reconstruct.pairwise_mrca_matrix(cols)
        _write(matrix_path, reconstruct.matrix_to_csv(cols, matrix))


def _cmd_compare(args, parser):
    with _open_in(args.truth) as fh:
        try:
            truth = tree.parse_newick(fh.read())
        except ValueError as err:
            raise DataError(f"{args.truth}: {err}") from None
    cols = _load_population(args.population)
    try:
        report = harness.evaluate(truth, cols)
    except ValueError as err:
        raise DataError(str(err)) from None
    out = args.out
    if out is None and args.out_dir:
        out = str(Path(args.out_dir) / "report.json")
    _write(out, report.to_json() + "\n")


def _add_policy_flags(p):
    p.add_argument("--policy", help="retention policy as ALGO:PARAM, e.g. crpr:64")
    p.add_argument("--algo", choices=ALGO_NAMES)
    p.add_argument("--param", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="strata", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("policy", help="print retained time points or a timelapse CSV")
    _add_policy_flags(p)
    p.add_argument("--depth", type=int, default=0)
    p.add_argument("--timelapse", type=int, metavar="MAX")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_policy, cmd_parser=p)

    p = sub.add_parser("curate", help="curate a JSONL observation stream")
    _add_policy_flags(p)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_curate, cmd_parser=p)

    p = sub.add_parser("simulate", help="run a neutral-drift simulation")
    _add_policy_flags(p)
    p.add_argument("-N", "--population-size", type=int, required=True)
    p.add_argument("-G", "--generations", type=int, required=True)
    p.add_argument("--model", choices=harness.MODELS, default="wright_fisher")
    p.add_argument("--width", type=int, default=64, choices=column.WIDTHS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--replicates", type=int, default=1)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=_cmd_simulate, cmd_parser=p)

    p = sub.add_parser("reconstruct", help="rebuild a phylogeny from a population")
    p.add_argument("--population", required=True)
    p.add_argument("--out")
    p.add_argument("--matrix", help="also write the pairwise MRCA-bounds CSV here")
    p.add_argument("--polytomy", choices=("keep", "bifurcate"), default="keep")
    p.add_argument("--correct-bias", action="store_true")
    p.add_argument("--seed", type=int, default=0, help="accepted for uniformity; unused")
    p.add_argument("--out-dir")
    p.set_defaults(func=_cmd_reconstruct, cmd_parser=p)

    p = sub.add_parser("compare", help="score a population against a truth tree")
    p.add_argument("--truth", required=True)
    p.add_argument("--population", required=True)
    p.add_argument("--out")
    p.add_argument("--seed", type=int, default=0, help="accepted for uniformity; unused")
    p.add_argument("--out-dir")
    p.set_defaults(func=_cmd_compare, cmd_parser=p)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "replicates", 1) < 1:
        parser.error("--replicates must be >= 1")
    try:
        args.func(args, args.cmd_parser)
    except DataError as err:
        print(f"strata {args.command}: error: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
