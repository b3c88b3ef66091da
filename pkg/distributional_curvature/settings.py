#!/usr/bin/env python3
"""
Run settings.

Priority: explicit argument > environment (.env is loaded) > default.
"""

import logging
import os
from dataclasses import dataclass
from typing import Optional

from dotenv import load_dotenv

from .config import DEFAULT_MAX_ATOMS

load_dotenv()

logger = logging.getLogger(__name__)

ENV_JOBS = 'DISTCURV_JOBS'
ENV_SEED = 'DISTCURV_SEED'
ENV_MAX_ATOMS = 'DISTCURV_MAX_ATOMS'


@dataclass
class RunSettings:
    """Settings shared by every check job of a run."""
    jobs: int = 1
    seed: int = 1
    max_atoms: int = DEFAULT_MAX_ATOMS

    def __post_init__(self):
        if self.jobs < 1:
            raise ValueError(f"jobs must be >= 1, got {self.jobs}")
        if self.seed < 0:
            raise ValueError(f"seed must be >= 0, got {self.seed}")
        if self.max_atoms < 1:
            raise ValueError(f"max_atoms must be >= 1, got {self.max_atoms}")


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == '':
        return default
    try:
        return int(raw)
    except ValueError:
        logger.warning(f"⚠️ Invalid {name}={raw!r}, using default {default}")
        return default


def load_settings(jobs: Optional[int] = None,
                  seed: Optional[int] = None,
                  max_atoms: Optional[int] = None) -> RunSettings:
    """
    Resolve run settings.

    Args:
        jobs: parallel check jobs (overrides DISTCURV_JOBS)
        seed: base random seed (overrides DISTCURV_SEED)
        max_atoms: longest accepted atom list (overrides DISTCURV_MAX_ATOMS)
    """
    return RunSettings(
        jobs=jobs if jobs is not None else _env_int(ENV_JOBS, 1),
        seed=seed if seed is not None else _env_int(ENV_SEED, 1),
        max_atoms=(max_atoms if max_atoms is not None
                   else _env_int(ENV_MAX_ATOMS, DEFAULT_MAX_ATOMS)),
    )
