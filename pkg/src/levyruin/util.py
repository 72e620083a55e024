"""Shared numeric guards."""

from __future__ import annotations

from .errors import DomainError

_UNIT_SLACK = 1e-9


def clamp_unit(value: float, what: str) -> float:
    """Clamp a probability-valued quantity to [0, 1].

    Violations within 1e-9 of the boundary are rounding noise and are clamped;
    anything larger indicates a formula bug and is a hard error.
    """
    if value < 0.0:
        if value < -_UNIT_SLACK:
            raise RuntimeError(f"{what} = {value!r} is significantly below 0")
        return 0.0
    if value > 1.0:
        if value > 1.0 + _UNIT_SLACK:
            raise RuntimeError(f"{what} = {value!r} is significantly above 1")
        return 1.0
    return value


def check_finite(value: float, name: str) -> float:
    import math

    value = float(value)
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite")
    return value
