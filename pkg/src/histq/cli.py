"""Command line interface: ``histq run | sweep | report``.

Exit codes: 0 success, 1 input error, 2 verification failure, 64 usage error.
"""

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import asymptotics
from .errors import HistqError, ParseError
from .reports import divergence_csv, dumps, render_text, sweep_csv, write_atomic
from .scenario import load_scenario, parse_dims
from .tasks import run_task

EXIT_OK, EXIT_INPUT, EXIT_VERIFY, EXIT_USAGE = 0, 1, 2, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def default_out_dir(scenario_path) -> Path:
    p = Path(scenario_path)
    return p.with_name(p.stem + ".out")


def run_scenario(path, out_dir=None, parallel=False, log=None) -> int:
    """Execute every task of a scenario file and write one JSON report per task."""
    log = log or sys.stderr
    out_dir = Path(out_dir) if out_dir else default_out_dir(path)
    try:
        sc = load_scenario(path)
    except HistqError as exc:
        print(f"{type(exc).__name__}: {exc}", file=log)
        return EXIT_INPUT

    def work(task):
        report, csv_text = run_task(sc, task)
        write_atomic(out_dir / f"{task.name}.json", dumps(report))
        if csv_text is not None:
            write_atomic(out_dir / f"{task.name}.csv", csv_text)
        return report

    try:
        if parallel and len(sc.tasks) > 1:
            with ThreadPoolExecutor() as pool:
                reports = list(pool.map(work, sc.tasks))
        else:
            reports = [work(t) for t in sc.tasks]
    except HistqError as exc:
        print(f"{type(exc).__name__}: {exc}", file=log)
        return EXIT_INPUT

    failed = [r["name"] for r in reports if not r["passed"]]
    for r in reports:
        print(f"{r['name']}: {'pass' if r['passed'] else 'FAIL'}", file=log)
    return EXIT_VERIFY if failed else EXIT_OK


def sweep_command(family="pure", n=1, dims="2..8", seed=0, out=None, probe="norm",
                  weights="1", i1=1, renormalize=False) -> str:
    """Run a norm sweep or divergence probe and return (and optionally write) its CSV."""
    try:
        dim_list = parse_dims(dims)
    except ParseError as exc:
        raise UsageError(str(exc)) from None
    if probe == "norm":
        try:
            rule = asymptotics.state_family(family)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        res = asymptotics.norm_sweep(rule, n, dim_list, seed=seed, family_name=family)
        text = sweep_csv(res)
    else:
        try:
            w = [float(t) for t in str(weights).split(",")]
        except ValueError:
            raise UsageError(f"bad weight list {weights!r}") from None
        res = asymptotics.divergence_probe(w, i1, dim_list, renormalize=renormalize)
        text = divergence_csv(res)
    if out:
        write_atomic(out, text)
    return text


def load_report(scenario, task, out_dir=None) -> dict:
    path = (Path(out_dir) if out_dir else default_out_dir(scenario)) / f"{task}.json"
    if not path.exists():
        raise FileNotFoundError(f"no report for task {task!r} at {path}")
    with open(path) as fh:
        return json.load(fh)


def build_parser():
    parser = _Parser(prog="histq", description="Decoherence functionals on finite history spaces.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("run", help="execute a scenario file")
    p.add_argument("scenario")
    p.add_argument("--out", help="output directory (default: <scenario>.out next to the file)")
    p.add_argument("--parallel", action="store_true", help="run independent tasks concurrently")

    p = sub.add_parser("sweep", help="norm sweep or divergence probe to CSV")
    p.add_argument("--family", default="pure", help="pure | maximally_mixed | geometric:r")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--dims", default="2..8", help="e.g. 2..8 or 2,4,6")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.add_argument("--probe", choices=("norm", "divergence"), default="norm")
    p.add_argument("--weights", default="1", help="divergence weights, comma separated")
    p.add_argument("--i1", type=int, default=1)
    p.add_argument("--renormalize", action="store_true")

    p = sub.add_parser("report", help="render a stored task report")
    p.add_argument("--scenario", required=True)
    p.add_argument("--task", required=True)
    p.add_argument("--out", help="run output directory")
    p.add_argument("--format", choices=("json", "text"), default="text")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return run_scenario(args.scenario, args.out, args.parallel)
    if args.command == "sweep":
        try:
            text = sweep_command(args.family, args.n, args.dims, args.seed, args.out, args.probe,
                                 args.weights, args.i1, args.renormalize)
        except UsageError as exc:
            print(f"histq sweep: error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        except HistqError as exc:
            print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
            return EXIT_INPUT
        if not args.out:
            sys.stdout.write(text)
        return EXIT_OK
    if args.command == "report":
        try:
            report = load_report(args.scenario, args.task, args.out)
        except FileNotFoundError as exc:
            print(f"NotFound: {exc}", file=sys.stderr)
            return EXIT_INPUT
        sys.stdout.write(dumps(report) if args.format == "json" else render_text(report))
        return EXIT_OK
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
