#!/usr/bin/env python3
"""
Report rendering: aligned text table, CSV and JSON.

Output is a pure function of the reports. CSV leaves out wall time so
that files from repeated runs compare equal byte for byte.
"""

import csv
import io
import json
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Union

from .config import REPORT_FORMATS
from .suite import CheckReport

CSV_COLUMNS = ['check_id', 'backend', 'grid', 'residual', 'scale', 'tolerance', 'passed',
               'order', 'seed', 'ladder', 'note', 'error']


def _num(value: Optional[float]) -> str:
    return '' if value is None else repr(float(value))


def _ladder(report: CheckReport) -> str:
    return ";".join(f"{'x'.join(map(str, res))}:{r!r}" for res, r in report.ladder)


def render_text(reports: Sequence[CheckReport]) -> str:
    header = ['check', 'backend', 'grid', 'residual', 'scale', 'tol', 'order', 'pass', 'note']
    rows = [header]
    for rep in reports:
        rows.append([
            rep.check_id,
            rep.backend,
            rep.grid,
            f"{rep.residual:.3e}",
            f"{rep.scale:.3e}",
            f"{rep.tolerance:.1e}",
            '' if rep.order is None else f"{rep.order:.2f}",
            'PASS' if rep.passed else 'FAIL',
            rep.error or rep.note,
        ])
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
    passed = sum(1 for rep in reports if rep.passed)
    lines.append('')
    lines.append(f"{passed}/{len(reports)} checks passed")
    return "\n".join(lines) + "\n"


def render_csv(reports: Sequence[CheckReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator='\n')
    writer.writerow(CSV_COLUMNS)
    for rep in reports:
        writer.writerow([
            rep.check_id,
            rep.backend,
            rep.grid,
            _num(rep.residual),
            _num(rep.scale),
            _num(rep.tolerance),
            'true' if rep.passed else 'false',
            _num(rep.order),
            rep.seed,
            _ladder(rep),
            rep.note,
            rep.error or '',
        ])
    return buf.getvalue()


def render_json(reports: Sequence[CheckReport]) -> str:
    payload = {'reports': [rep.to_dict() for rep in reports]}
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


_RENDERERS = {
    'text': render_text,
    'csv': render_csv,
    'json': render_json,
}


def render_report(reports: Sequence[CheckReport], fmt: str = 'text') -> str:
    if not reports:
        raise ValueError("no reports to render")
    if fmt not in _RENDERERS:
        supported = "\n".join(f"  - {name}" for name in REPORT_FORMATS)
        raise ValueError(f"Format '{fmt}' is not supported.\n\nSupported formats:\n{supported}")
    return _RENDERERS[fmt](reports)


def emit_report(reports: Sequence[CheckReport], fmt: str = 'text',
                path: Optional[Union[str, Path]] = None) -> str:
    """
    Render reports and write them to ``path`` when given.

    Returns the rendered text. Raises OSError when the path is not writable.
    """
    text = render_report(reports, fmt)
    if path is not None:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        with open(target, 'w', encoding='utf-8', newline='') as fh:
            fh.write(text)
    return text


def load_reports_json(source: Union[str, Path, Iterable[str]]) -> List[CheckReport]:
    """Read reports written by ``emit_report(..., 'json')``."""
    if isinstance(source, Path):
        text = source.read_text(encoding='utf-8')
    elif isinstance(source, str):
        text = source if source.lstrip().startswith('{') else \
            Path(source).read_text(encoding='utf-8')
    else:
        text = "".join(source)
    data = json.loads(text)
    return [CheckReport.from_dict(item) for item in data['reports']]
