#!/usr/bin/env python3
"""
Scenario files.

A scenario is a JSON document naming a space, optional fixed fields, the
checks to run, the grid, the random field budget and the output. Loading
validates everything up front and raises ScenarioError with the offending
key, so no computation starts on a broken file.
"""

import json
import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

from .config import (
    BACKENDS,
    CHECKS,
    DEFAULT_DRAWS,
    DEFAULT_MAX_ATOMS,
    MIN_RESOLUTION,
    QUADRATURE_RULES,
    REPORT_FORMATS,
)
from .errors import CurvatureError, ScenarioError
from .spaces import ChartSpace, TestFunction, TestVector, builtin_space, make_space
from .suite import FUNCTION_ROLES, VECTOR_ROLES, FieldBudget

logger = logging.getLogger(__name__)

TOP_LEVEL_KEYS = ('name', 'description', 'space', 'fields', 'checks', 'grid', 'budget',
                  'seed', 'output')
SPACE_KEYS = ('name', 'dim', 'domain', 'periodic', 'metric', 'weight', 'coords', 'params',
              'curvature', 'family', 'monomials', 'bump_factor')
CHECK_KEYS = ('id', 'tol', 'k', 'target', 'resolutions')
BUDGET_KEYS = ('atoms', 'degree', 'range', 'seed', 'draws', 'family')

SCENARIO_PACKAGE = 'distributional_curvature.scenarios'


@dataclass
class CheckSpec:
    check_id: str
    tol: Optional[float] = None
    k: Optional[float] = None
    target: Optional[str] = None
    resolutions: Optional[List[int]] = None


@dataclass
class Scenario:
    name: str
    space: ChartSpace
    checks: List[CheckSpec]
    resolution: Tuple[int, ...]
    rules: Optional[Tuple[str, ...]] = None
    fields: Dict[str, Union[TestVector, TestFunction]] = field(default_factory=dict)
    budget: FieldBudget = field(default_factory=FieldBudget)
    seed: Optional[int] = None
    output_path: Optional[str] = None
    formats: List[str] = field(default_factory=lambda: ['text'])
    description: str = ''


def _require(cond: bool, key: str, message: str) -> None:
    if not cond:
        raise ScenarioError(key, message)


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _check_keys(data: Mapping[str, Any], allowed, prefix: str) -> None:
    for key in data:
        _require(key in allowed, f"{prefix}{key}", f"{prefix}{key}: unknown key")


def _load_space(raw: Any) -> ChartSpace:
    if isinstance(raw, str):
        raw = {'name': raw}
    _require(isinstance(raw, dict), 'space', "space must be a backend name or an object")
    _check_keys(raw, SPACE_KEYS, 'space.')
    name = raw.get('name')
    inline = any(key in raw for key in ('dim', 'domain', 'metric'))
    if not inline:
        _require(isinstance(name, str), 'space.name', "space.name is required")
        if name not in BACKENDS:
            supported = ", ".join(BACKENDS)
            raise ScenarioError('space.name',
                                f"space.name: unknown backend '{name}' (supported: {supported})")
        return builtin_space(name)

    for key in ('dim', 'domain', 'periodic', 'metric'):
        _require(key in raw, f"space.{key}", f"space.{key} is required for an inline space")
    dim = raw['dim']
    _require(_is_int(dim) and 1 <= dim <= 3, 'space.dim', "space.dim must be 1, 2 or 3")
    for key in ('domain', 'periodic', 'metric'):
        _require(isinstance(raw[key], list) and len(raw[key]) == dim, f"space.{key}",
                 f"space.{key} must have {dim} entries")
    for i, row in enumerate(raw['metric']):
        _require(isinstance(row, list) and len(row) == dim, f"space.metric[{i}]",
                 f"space.metric[{i}] must have {dim} entries")
    try:
        return make_space(
            name=name or 'inline',
            dim=dim,
            domain=raw['domain'],
            periodic=raw['periodic'],
            metric=raw['metric'],
            weight=raw.get('weight', '1'),
            coords=raw.get('coords'),
            params=raw.get('params'),
            curvature=raw.get('curvature'),
            family=raw.get('family'),
            monomials=raw.get('monomials'),
            bump_factor=raw.get('bump_factor'),
        )
    except CurvatureError as exc:
        raise ScenarioError('space', f"space: {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ScenarioError('space', f"space: {exc}") from exc


def _load_fields(raw: Any, space: ChartSpace,
                 max_atoms: int) -> Dict[str, Union[TestVector, TestFunction]]:
    _require(isinstance(raw, dict), 'fields', "fields must be an object")
    out: Dict[str, Union[TestVector, TestFunction]] = {}
    for name, value in raw.items():
        key = f"fields.{name}"
        if name in VECTOR_ROLES:
            _require(isinstance(value, list) and value, key, f"{key} must be a list of [f, g] pairs")
            _require(len(value) <= max_atoms, key,
                     f"{key} has {len(value)} atoms, the maximum is {max_atoms}")
            pairs = []
            for i, pair in enumerate(value):
                _require(isinstance(pair, list) and len(pair) == 2
                         and all(isinstance(s, str) for s in pair),
                         f"{key}[{i}]", f"{key}[{i}] must be a pair of expression strings")
                parsed = []
                for j, text in enumerate(pair):
                    try:
                        parsed.append(space.function(text))
                    except CurvatureError as exc:
                        raise ScenarioError(f"{key}[{i}][{j}]", f"{key}[{i}][{j}]: {exc}") from exc
                pairs.append(tuple(parsed))
            out[name] = TestVector(tuple(pairs))
        elif name in FUNCTION_ROLES:
            _require(isinstance(value, str), key, f"{key} must be an expression string")
            try:
                out[name] = space.function(value)
            except CurvatureError as exc:
                raise ScenarioError(key, f"{key}: {exc}") from exc
        else:
            roles = ", ".join(VECTOR_ROLES + FUNCTION_ROLES)
            raise ScenarioError(key, f"{key}: unknown field role (expected one of {roles})")
    return out


def validate_resolution(raw: Any, key: str, dim: int) -> Tuple[int, ...]:
    if _is_int(raw):
        raw = [raw] * dim
    _require(isinstance(raw, list) and len(raw) == dim and all(_is_int(n) for n in raw), key,
             f"{key} must be {dim} integers")
    for i, n in enumerate(raw):
        _require(n >= MIN_RESOLUTION, f"{key}[{i}]", f"{key}[{i}] < {MIN_RESOLUTION}")
    return tuple(raw)


def _load_grid(raw: Any, space: ChartSpace) -> Tuple[Tuple[int, ...], Optional[Tuple[str, ...]]]:
    _require(isinstance(raw, dict), 'grid', "grid must be an object")
    _check_keys(raw, ('resolution', 'rule'), 'grid.')
    if 'resolution' in raw:
        resolution = validate_resolution(raw['resolution'], 'grid.resolution', space.dim)
    elif space.resolution:
        resolution = tuple(space.resolution)
    else:
        raise ScenarioError('grid.resolution', "grid.resolution is required")
    rules = None
    if 'rule' in raw:
        rule = raw['rule']
        rules_list = [rule] * space.dim if isinstance(rule, str) else rule
        _require(isinstance(rules_list, list) and len(rules_list) == space.dim, 'grid.rule',
                 f"grid.rule must be a rule name or {space.dim} rule names")
        for i, r in enumerate(rules_list):
            _require(r in QUADRATURE_RULES, f"grid.rule[{i}]",
                     f"grid.rule[{i}]: unknown rule '{r}' (supported: {', '.join(QUADRATURE_RULES)})")
            _require(r != 'equispaced' or space.periodic[i], f"grid.rule[{i}]",
                     f"grid.rule[{i}]: equispaced needs a periodic axis")
        rules = tuple(rules_list)
    return resolution, rules


def _load_checks(raw: Any, space: ChartSpace) -> List[CheckSpec]:
    _require(isinstance(raw, list) and raw, 'checks', "checks must be a nonempty list")
    out = []
    for i, entry in enumerate(raw):
        key = f"checks[{i}]"
        if isinstance(entry, str):
            entry = {'id': entry}
        _require(isinstance(entry, dict), key, f"{key} must be a check id or an object")
        _check_keys(entry, CHECK_KEYS, f"{key}.")
        check_id = entry.get('id')
        _require(check_id in CHECKS, f"{key}.id", f"{key}.id: unknown check '{check_id}'")
        spec = CheckSpec(check_id)
        if 'tol' in entry:
            _require(_is_number(entry['tol']) and entry['tol'] >= 0, f"{key}.tol",
                     f"{key}.tol must be a nonnegative number")
            spec.tol = float(entry['tol'])
        if 'k' in entry:
            _require(_is_number(entry['k']), f"{key}.k", f"{key}.k must be a number")
            spec.k = float(entry['k'])
        kind = CHECKS[check_id]['kind']
        if kind == 'conjecture':
            _require(space.curvature is not None, f"{key}.id",
                     f"{key}.id: conjecture needs a space with known constant curvature")
        if 'target' in entry:
            target = entry['target']
            _require(kind == 'convergence', f"{key}.target",
                     f"{key}.target only applies to convergence checks")
            _require(target in CHECKS and CHECKS[target]['kind'] in ('identity', 'oracle'),
                     f"{key}.target", f"{key}.target: '{target}' cannot be refined")
            spec.target = target
        if 'resolutions' in entry:
            rungs = entry['resolutions']
            rkey = f"{key}.resolutions"
            _require(kind == 'convergence', rkey, f"{rkey} only applies to convergence checks")
            _require(isinstance(rungs, list) and len(rungs) >= 3
                     and all(_is_int(n) for n in rungs), rkey,
                     f"{rkey} must list at least 3 integers")
            for j, n in enumerate(rungs):
                _require(n >= MIN_RESOLUTION, f"{rkey}[{j}]", f"{rkey}[{j}] < {MIN_RESOLUTION}")
            _require(all(b > a for a, b in zip(rungs, rungs[1:])), rkey,
                     f"{rkey} must be strictly increasing")
            spec.resolutions = list(rungs)
        out.append(spec)
    return out


def _load_budget(raw: Any, seed: Optional[int]) -> FieldBudget:
    _require(isinstance(raw, dict), 'budget', "budget must be an object")
    _check_keys(raw, BUDGET_KEYS, 'budget.')
    for key in ('atoms', 'degree', 'seed', 'draws'):
        if key in raw:
            _require(_is_int(raw[key]), f"budget.{key}", f"budget.{key} must be an integer")
    if 'range' in raw:
        _require(_is_number(raw['range']), 'budget.range', "budget.range must be a number")
    try:
        return FieldBudget(
            atoms=raw.get('atoms', 2),
            degree=raw.get('degree', 2),
            coef_range=float(raw.get('range', 2.0)),
            seed=seed if seed is not None else raw.get('seed', 1),
            family=raw.get('family'),
            draws=raw.get('draws', DEFAULT_DRAWS),
        )
    except CurvatureError as exc:
        raise ScenarioError('budget', str(exc)) from exc


def _load_output(raw: Any) -> Tuple[Optional[str], List[str]]:
    _require(isinstance(raw, dict), 'output', "output must be an object")
    _check_keys(raw, ('path', 'format'), 'output.')
    path = raw.get('path')
    _require(path is None or isinstance(path, str), 'output.path', "output.path must be a string")
    formats = raw.get('format', 'text')
    formats = [formats] if isinstance(formats, str) else formats
    _require(isinstance(formats, list) and formats, 'output.format',
             "output.format must be a format name or a list of them")
    for i, fmt in enumerate(formats):
        _require(fmt in REPORT_FORMATS, f"output.format[{i}]",
                 f"output.format[{i}]: unknown format '{fmt}' (supported: {', '.join(REPORT_FORMATS)})")
    return path, list(formats)


def parse_scenario(data: Any, name: str = 'scenario',
                   max_atoms: int = DEFAULT_MAX_ATOMS) -> Scenario:
    """Validate a decoded scenario document."""
    _require(isinstance(data, dict), '<root>', "scenario must be a JSON object")
    _check_keys(data, TOP_LEVEL_KEYS, '')
    _require('space' in data, 'space', "space is required")
    _require('checks' in data, 'checks', "checks is required")

    space = _load_space(data['space'])
    seed = data.get('seed')
    budget_raw = data.get('budget', {})
    _require(seed is None or (_is_int(seed) and seed >= 0), 'seed',
             "seed must be a nonnegative integer")
    resolution, rules = _load_grid(data.get('grid', {}), space)
    checks = _load_checks(data['checks'], space)
    fields = _load_fields(data.get('fields', {}), space, max_atoms)
    budget = _load_budget(budget_raw, seed)
    explicit_seed = seed if seed is not None else \
        (budget_raw.get('seed') if isinstance(budget_raw, dict) else None)
    try:
        budget.family_for(space)
    except CurvatureError as exc:
        raise ScenarioError('budget.family', f"budget.family: {exc}") from exc
    output_path, formats = _load_output(data.get('output', {}))

    return Scenario(
        name=data.get('name', name),
        space=space,
        checks=checks,
        resolution=resolution,
        rules=rules,
        fields=fields,
        budget=budget,
        seed=explicit_seed,
        output_path=output_path,
        formats=formats,
        description=data.get('description', ''),
    )


def bundled_scenarios() -> List[str]:
    """Names of the scenarios shipped with the package."""
    root = resources.files(SCENARIO_PACKAGE)
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith('.json'))


def find_scenario(ref: str) -> Path:
    """A scenario path, or the bundled scenario of that name."""
    path = Path(ref)
    if path.is_file():
        return path
    name = ref[:-5] if ref.endswith('.json') else ref
    candidate = resources.files(SCENARIO_PACKAGE).joinpath(f"{name}.json")
    if candidate.is_file():
        return Path(str(candidate))
    raise ScenarioError('<path>', f"scenario file not found: {ref}")


def load_scenario(ref: str, max_atoms: int = DEFAULT_MAX_ATOMS) -> Scenario:
    """Read and validate a scenario file (or a bundled scenario name)."""
    path = find_scenario(ref)
    try:
        data = json.loads(path.read_text(encoding='utf-8'))
    except json.JSONDecodeError as exc:
        raise ScenarioError('<json>', f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    except OSError as exc:
        raise ScenarioError('<path>', f"cannot read {path}: {exc}") from exc
    logger.debug("loaded scenario %s", path)
    return parse_scenario(data, path.stem, max_atoms)
