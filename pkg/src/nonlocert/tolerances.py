"""Numerical thresholds used across the package.

All thresholds scale together through ``NONLOC_TOLERANCE_SCALE``.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace

ENV_VAR = "NONLOC_TOLERANCE_SCALE"


@dataclass(frozen=True)
class Tolerances:
    rank: float = 1e-9
    orthogonality: float = 1e-10
    flat: float = 1e-9
    support: float = 1e-10
    nullspace: float = 1e-9
    norm: float = 1e-10

    def scaled(self, factor: float) -> "Tolerances":
        if not factor > 0:
            raise ValueError(f"tolerance scale must be positive, got {factor!r}")
        return replace(self, **{f.name: getattr(self, f.name) * factor for f in fields(self)})

    @classmethod
    def from_env(cls, environ=None) -> "Tolerances":
        environ = os.environ if environ is None else environ
        raw = environ.get(ENV_VAR)
        if raw is None or raw.strip() == "":
            return cls()
        return cls().scaled(float(raw))

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


DEFAULT = Tolerances()
