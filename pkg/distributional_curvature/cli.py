#!/usr/bin/env python3
"""
Command line interface.

    distributional-curvature run torus-full --format csv --out out/torus.csv
    distributional-curvature --list-checks

Exit codes: 0 when every check passes, 1 when a check fails or errors,
2 when the scenario or the flags are invalid (nothing is written then).
"""

import argparse
import dataclasses
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

from . import __version__
from .batch_runner import CheckRequest, run_batch
from .config import BACKENDS, CHECKS, REPORT_FORMATS
from .errors import CurvatureError, ScenarioError
from .quadrature import build_grid
from .report import emit_report
from .scenario import Scenario, bundled_scenarios, load_scenario, validate_resolution
from .settings import load_settings
from .suite import CheckReport

logger = logging.getLogger(__name__)

EXTENSIONS = {'text': '.txt', 'csv': '.csv', 'json': '.json'}


@dataclass
class RunOutcome:
    exit_code: int
    reports: List[CheckReport] = field(default_factory=list)
    written: List[str] = field(default_factory=list)
    error: Optional[str] = None


def parse_grid_flag(text: str, dim: int):
    """'64x64' (or '64') -> (64, 64); ScenarioError on bad input."""
    try:
        parts = [int(p) for p in text.lower().split('x')]
    except ValueError:
        raise ScenarioError('--grid', f"--grid must look like 64x64, got '{text}'") from None
    if len(parts) == 1:
        parts = parts * dim
    return validate_resolution(parts, 'grid.resolution', dim)


def _output_paths(base: Optional[str], formats: Sequence[str]) -> List[Optional[Path]]:
    if base is None:
        return [None] * len(formats)
    path = Path(base)
    if len(formats) == 1:
        return [path]
    return [path.with_suffix(EXTENSIONS[fmt]) for fmt in formats]


def build_requests(scenario: Scenario, grid, refine: Optional[int] = None) -> List[CheckRequest]:
    """One job per declared check, in declared order."""
    requests = []
    for spec in scenario.checks:
        kind = CHECKS[spec.check_id]['kind']
        if refine is not None and kind in ('identity', 'oracle'):
            base = grid.resolution[0]
            requests.append(CheckRequest(
                check_id='convergence',
                space=scenario.space,
                grid=grid,
                budget=scenario.budget,
                tolerance=spec.tol,
                fields=scenario.fields,
                target=spec.check_id,
                resolutions=[base * 2 ** i for i in range(refine)],
                request_id=f"convergence[{spec.check_id}]@{scenario.space.name}",
            ))
            continue
        requests.append(CheckRequest(
            check_id=spec.check_id,
            space=scenario.space,
            grid=grid,
            budget=scenario.budget,
            tolerance=spec.tol,
            fields=scenario.fields,
            k=spec.k,
            target=spec.target,
            resolutions=spec.resolutions,
        ))
    return requests


def run_scenario(path: str, grid: Optional[str] = None, seed: Optional[int] = None,
                 refine: Optional[int] = None, out: Optional[str] = None,
                 fmt: Optional[str] = None, jobs: Optional[int] = None,
                 verbose: bool = True) -> RunOutcome:
    """
    Load, validate and run a scenario, then write its reports.

    Args:
        path: scenario file, or the name of a bundled scenario
        grid: 'RxR' override of the scenario grid
        seed: override of the scenario seed
        refine: turn identity and oracle checks into convergence studies
            with this many rungs, doubling from the scenario resolution
        out: report path override
        fmt: report format override
        jobs: parallel check jobs
    """
    try:
        settings = load_settings(jobs=jobs, seed=seed)
        scenario = load_scenario(path, max_atoms=settings.max_atoms)
        if grid is not None:
            scenario.resolution = parse_grid_flag(grid, scenario.space.dim)
        if refine is not None and refine < 3:
            raise ScenarioError('--refine', "--refine needs at least 3 rungs")
        if fmt is not None:
            if fmt not in REPORT_FORMATS:
                raise ScenarioError('--format', f"--format: unknown format '{fmt}'")
            scenario.formats = [fmt]
        if seed is not None:
            effective_seed = seed
        elif scenario.seed is not None:
            effective_seed = scenario.seed
        else:
            effective_seed = settings.seed
        scenario.budget = dataclasses.replace(scenario.budget, seed=effective_seed)

        paths = _output_paths(out if out is not None else scenario.output_path, scenario.formats)
        for target in paths:
            if target is not None and target.is_dir():
                raise ScenarioError('output.path', f"output.path is a directory: {target}")

        quadrature = build_grid(scenario.space, scenario.resolution, scenario.rules)
    except (CurvatureError, ValueError, OSError) as exc:
        message = str(exc)
        print(f"❌ {message}", file=sys.stderr)
        return RunOutcome(exit_code=2, error=message)

    # progress goes to stderr whenever a report is written to stdout
    progress = sys.stderr if any(target is None for target in paths) else None
    if verbose:
        print(f"🚀 Scenario '{scenario.name}' on {scenario.space.name} "
              f"({quadrature.label()}, seed {scenario.budget.seed}, jobs {settings.jobs})",
              file=progress)

    requests = build_requests(scenario, quadrature, refine)
    reports = run_batch(requests, jobs=settings.jobs, verbose=verbose, stream=progress)

    written = []
    for fmt_name, target in zip(scenario.formats, paths):
        try:
            text = emit_report(reports, fmt_name, target)
        except OSError as exc:
            print(f"❌ Cannot write {target}: {exc}", file=sys.stderr)
            return RunOutcome(exit_code=1, reports=reports, written=written, error=str(exc))
        if target is None:
            sys.stdout.write(text)
        else:
            written.append(str(target))
            if verbose:
                print(f"📁 Wrote {fmt_name} report: {target}", file=progress)

    code = 0 if all(rep.passed for rep in reports) else 1
    if verbose:
        status = "✅ All checks passed" if code == 0 else "❌ Some checks failed"
        print(f"{status} ({sum(r.passed for r in reports)}/{len(reports)})", file=progress)
    return RunOutcome(exit_code=code, reports=reports, written=written)


def _list_checks() -> None:
    for check_id, info in CHECKS.items():
        print(f"{check_id:<12} {info['kind']:<12} {info['description']}")


def _list_backends() -> None:
    for name, info in BACKENDS.items():
        kappa = '-' if info['curvature'] is None else f"{info['curvature']:+g}"
        print(f"{name:<22} K={kappa:<4} {info['description']}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='distributional-curvature',
        description='Distributional curvature identity checks on weighted chart spaces',
    )
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    parser.add_argument('--list-checks', action='store_true', help='List check ids and exit')
    parser.add_argument('--list-backends', action='store_true',
                        help='List built-in chart spaces and exit')
    parser.add_argument('--list-scenarios', action='store_true',
                        help='List bundled scenarios and exit')

    sub = parser.add_subparsers(dest='command')
    run = sub.add_parser('run', help='Run a scenario file or a bundled scenario')
    run.add_argument('scenario', help='Scenario JSON path or bundled scenario name')
    run.add_argument('--grid', help='Grid resolution override, e.g. 64x64')
    run.add_argument('--seed', type=int, help='Random seed override')
    run.add_argument('--refine', type=int, metavar='N',
                     help='Run every identity/oracle check as an N-rung convergence study')
    run.add_argument('--out', help='Report path (stdout when omitted)')
    run.add_argument('--format', choices=REPORT_FORMATS, help='Report format')
    run.add_argument('--jobs', type=int, help='Parallel check jobs (default: DISTCURV_JOBS or 1)')
    run.add_argument('--quiet', action='store_true', help='Only print the report')
    run.add_argument('--debug', action='store_true', help='Enable debug logging')
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.list_checks:
        _list_checks()
        return 0
    if args.list_backends:
        _list_backends()
        return 0
    if args.list_scenarios:
        for name in bundled_scenarios():
            print(name)
        return 0
    if args.command != 'run':
        parser.print_help()
        return 2

    logging.basicConfig(level=logging.DEBUG if args.debug else logging.WARNING,
                        format='%(levelname)s %(name)s: %(message)s')
    outcome = run_scenario(
        args.scenario,
        grid=args.grid,
        seed=args.seed,
        refine=args.refine,
        out=args.out,
        fmt=args.format,
        jobs=args.jobs,
        verbose=not args.quiet,
    )
    return outcome.exit_code


if __name__ == "__main__":
    sys.exit(main())
