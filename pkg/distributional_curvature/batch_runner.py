#!/usr/bin/env python3
"""
Batch runner for check jobs.

Jobs are blocking numpy work, so each one runs in a worker thread
(``asyncio.to_thread``) while a local semaphore bounds how many run at once.
Results always come back in request order.
"""

import asyncio
import math
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, TextIO

from .quadrature import QuadratureGrid
from .spaces import ChartSpace
from .suite import CheckReport, FieldBudget, run_check


@dataclass
class CheckRequest:
    """One check job."""
    check_id: str
    space: ChartSpace
    grid: QuadratureGrid
    budget: FieldBudget
    tolerance: Optional[float] = None
    fields: Mapping[str, Any] = field(default_factory=dict)
    k: Optional[float] = None
    target: Optional[str] = None
    resolutions: Optional[Sequence[int]] = None
    request_id: Optional[str] = None

    def __post_init__(self):
        if self.request_id is None:
            self.request_id = f"{self.check_id}@{self.space.name}"


@dataclass
class CheckResult:
    request_id: str
    check_id: str
    success: bool
    report: Optional[CheckReport] = None
    error: Optional[str] = None
    duration: Optional[float] = None


def _execute(request: CheckRequest) -> CheckReport:
    return run_check(
        request.check_id,
        request.space,
        request.grid,
        request.budget,
        tolerance=request.tolerance,
        fields=request.fields,
        k=request.k,
        target=request.target,
        resolutions=request.resolutions,
    )


class CheckBatchRunner:
    """Runs check jobs concurrently and collects their reports."""

    def __init__(self,
                 max_concurrent: int = 1,
                 executor: Optional[Callable[[CheckRequest], CheckReport]] = None,
                 progress_callback: Optional[Callable[[int, int, CheckResult], None]] = None,
                 verbose: bool = True,
                 stream: Optional[TextIO] = None):
        if max_concurrent < 1:
            raise ValueError(f"max_concurrent must be >= 1, got {max_concurrent}")
        self.max_concurrent = max_concurrent
        self.executor = executor or _execute
        self.progress_callback = progress_callback
        self.verbose = verbose
        # None prints to stdout
        self.stream = stream

        self.stats: Dict[str, Any] = {
            'total_submitted': 0,
            'total_passed': 0,
            'total_failed': 0,
            'total_errors': 0,
            'start_time': None,
            'end_time': None,
        }
        self._done = 0

    def _log(self, message: str) -> None:
        if self.verbose:
            print(message, file=self.stream)

    async def _run_one(self, request: CheckRequest, semaphore: asyncio.Semaphore,
                       total: int) -> CheckResult:
        async with semaphore:
            start_time = time.perf_counter()
            try:
                report = await asyncio.to_thread(self.executor, request)
                result = CheckResult(
                    request_id=request.request_id,
                    check_id=request.check_id,
                    success=report.error is None,
                    report=report,
                    error=report.error,
                    duration=time.perf_counter() - start_time,
                )
            except Exception as e:
                result = CheckResult(
                    request_id=request.request_id,
                    check_id=request.check_id,
                    success=False,
                    error=f"{type(e).__name__}: {e}",
                    duration=time.perf_counter() - start_time,
                )

        self._record(result)
        self._done += 1
        if self.progress_callback:
            self.progress_callback(self._done, total, result)
        return result

    def _record(self, result: CheckResult) -> None:
        if result.report is None or result.report.error is not None:
            self.stats['total_errors'] += 1
            self._log(f"❌ {result.request_id} raised: {result.error}")
        elif result.report.passed:
            self.stats['total_passed'] += 1
            self._log(f"✅ {result.request_id} passed "
                      f"(residual {result.report.residual:.3e}, {result.duration:.1f}s)")
        else:
            self.stats['total_failed'] += 1
            self._log(f"❌ {result.request_id} failed "
                      f"(residual {result.report.residual:.3e} > "
                      f"{result.report.tolerance:.1e} x scale {result.report.scale:.3e})")

    async def run(self, requests: List[CheckRequest]) -> List[CheckResult]:
        """Run every request; the result list matches the request order."""
        if not requests:
            return []

        self.stats.update({
            'total_submitted': len(requests),
            'total_passed': 0,
            'total_failed': 0,
            'total_errors': 0,
            'start_time': time.perf_counter(),
        })
        self._done = 0
        self._log(f"🚀 Running {len(requests)} check(s), {self.max_concurrent} at a time")

        semaphore = asyncio.Semaphore(self.max_concurrent)
        results = await asyncio.gather(
            *(self._run_one(request, semaphore, len(requests)) for request in requests)
        )

        self.stats['end_time'] = time.perf_counter()
        self._print_final_stats(results)
        return list(results)

    def _print_final_stats(self, results: Sequence[CheckResult]) -> None:
        if not self.verbose:
            return
        total_time = self.stats['end_time'] - self.stats['start_time']

        self._log("\n" + "=" * 80)
        self._log("📊 Check batch summary")
        self._log("=" * 80)
        self._log(f"Total checks: {self.stats['total_submitted']}")
        self._log(f"✅ Passed: {self.stats['total_passed']}")
        self._log(f"❌ Failed: {self.stats['total_failed']}")
        self._log(f"⚠️  Errors: {self.stats['total_errors']}")
        self._log(f"⏱️  Total time: {total_time:.1f}s")
        durations = [r.duration for r in results if r.duration is not None]
        if durations:
            self._log(f"⏱️  Average per check: {sum(durations) / len(durations):.2f}s")
        worst = [r.report for r in results if r.report is not None and math.isfinite(r.report.ratio)]
        if worst:
            top = max(worst, key=lambda rep: rep.ratio)
            self._log(f"🔎 Largest residual/scale: {top.ratio:.3e} "
                      f"({top.check_id} on {top.backend})")
        self._log("=" * 80)


def run_batch(requests: List[CheckRequest], jobs: int = 1, verbose: bool = True,
              progress_callback: Optional[Callable[[int, int, CheckResult], None]] = None,
              stream: Optional[TextIO] = None) -> List[CheckReport]:
    """
    Synchronous entry point used by the CLI.

    Returns one report per request, in request order. A job that raised
    outside the check layer still yields an error report.
    """
    runner = CheckBatchRunner(max_concurrent=jobs, progress_callback=progress_callback,
                              verbose=verbose, stream=stream)
    results = asyncio.run(runner.run(requests))
    reports = []
    for request, result in zip(requests, results):
        if result.report is not None:
            reports.append(result.report)
        else:
            reports.append(CheckReport(
                check_id=request.check_id,
                backend=request.space.name,
                residual=math.inf,
                scale=1.0,
                tolerance=request.tolerance or 0.0,
                passed=False,
                grid=request.grid.label(),
                seed=request.budget.seed,
                wall_time=result.duration or 0.0,
                error=result.error,
            ))
    return reports
