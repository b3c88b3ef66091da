"""Report rendering."""

import json

import pytest

from distributional_curvature.report import (
    CSV_COLUMNS,
    emit_report,
    load_reports_json,
    render_csv,
    render_report,
    render_text,
)
from distributional_curvature.suite import CheckReport


@pytest.fixture
def reports():
    return [
        CheckReport('conscov', 'torus', 2.5e-16, 31.0, 1e-9, True, grid='64x64', seed=1,
                    wall_time=0.42, details={'draws': 20, 'worst_draw': 3}),
        CheckReport('convergence', 'hyperbolic-disk', 3e-9, 12.0, 1e-6, True,
                    grid='32->48->64', ladder=[((32, 32), 1e-5), ((48, 48), 2e-7), ((64, 64), 3e-9)],
                    order=12.5, seed=1, wall_time=9.0),
        CheckReport('oracle', 'sphere', float('inf'), 1.0, 1e-6, False, grid='96x96',
                    error='AdmissibilityError: not admissible'),
    ]


def test_csv_header_and_rows(reports):
    lines = render_csv(reports).splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 4
    assert lines[1].startswith('conscov,torus,64x64,2.5e-16,31.0,1e-09,true,')
    assert '32x32:1e-05;48x48:2e-07;64x64:3e-09' in lines[2]
    assert lines[3].split(',')[6] == 'false'


def test_csv_leaves_out_wall_time(reports):
    slower = [CheckReport(**{**rep.to_dict(), 'ladder': rep.ladder, 'wall_time': 99.0})
              for rep in reports]
    assert render_csv(slower) == render_csv(reports)


def test_text_table(reports):
    text = render_text(reports)
    assert "PASS" in text and "FAIL" in text
    assert text.rstrip().endswith("2/3 checks passed")
    assert "AdmissibilityError" in text


def test_json_round_trip(reports, tmp_path):
    path = tmp_path / 'out' / 'reports.json'
    text = emit_report(reports, 'json', path)
    assert path.read_text(encoding='utf-8') == text
    assert json.loads(text)['reports'][1]['ladder'][0] == {'resolution': [32, 32], 'residual': 1e-5}
    assert load_reports_json(path) == reports
    assert load_reports_json(text) == reports


def test_unknown_format(reports):
    with pytest.raises(ValueError, match="Supported formats"):
        render_report(reports, 'yaml')


def test_empty_report_list():
    with pytest.raises(ValueError):
        render_report([], 'text')
