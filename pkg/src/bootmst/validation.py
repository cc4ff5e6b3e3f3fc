"""Input checking shared by the estimators, the pipeline and the CLI."""

from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array

from .data import ReturnsPanel

__all__ = ["check_panel", "check_thresholds", "default_thresholds", "parse_thresholds", "seed_from_random_state"]


def check_panel(X, elements=None) -> ReturnsPanel:
    """Coerce ``X`` to a :class:`ReturnsPanel`.

    ``X`` is a panel, a DataFrame or an array of shape ``(n_samples, n_features)``
    = ``(T, n)``: rows are time records, columns are elements.
    """
    if isinstance(X, ReturnsPanel):
        return X
    times = None
    if hasattr(X, "columns") and hasattr(X, "index"):
        if elements is None:
            elements = [str(c) for c in X.columns]
        times = [str(t) for t in X.index]
    arr = check_array(X, dtype=np.float64, ensure_min_samples=3, ensure_min_features=2)
    if elements is None:
        elements = [f"x{k}" for k in range(arr.shape[1])]
    return ReturnsPanel(tuple(elements), arr.T, None if times is None else tuple(times))


def default_thresholds(B: int) -> list[int]:
    """``B - step`` down to ``step`` with ``step = 20 * B / 1000`` (at least 1)."""
    step = max(1, round(B / 50))
    return list(range(B - step, step - 1, -step))


def check_thresholds(thresholds, B: int) -> list[int]:
    out = [int(t) for t in thresholds]
    bad = [t for t in out if not 0 <= t <= B]
    if bad:
        raise ValueError(f"threshold {bad[0]} outside [0, {B}]")
    return out


def parse_thresholds(text: str | None, B: int) -> list[int]:
    """``None`` -> default range; ``"start:stop:step"`` inclusive range; or a comma list."""
    if text is None or text == "":
        return default_thresholds(B)
    if ":" in text:
        start, stop, step = (int(x) for x in text.split(":"))
        if step <= 0:
            raise ValueError("threshold step must be positive")
        sign = -1 if start > stop else 1
        return check_thresholds(range(start, stop + sign, sign * step), B)
    return check_thresholds((int(x) for x in text.split(",")), B)


def seed_from_random_state(random_state) -> int:
    """64-bit master seed from an int, ``None`` or a numpy generator."""
    if random_state is None:
        return int(np.random.SeedSequence().generate_state(1, dtype=np.uint64)[0])
    if isinstance(random_state, (int, np.integer)):
        return int(random_state)
    if isinstance(random_state, np.random.Generator):
        return int(random_state.integers(0, 2**63))
    if isinstance(random_state, np.random.RandomState):
        return int(random_state.randint(0, 2**31 - 1))
    raise ValueError(f"cannot derive a seed from {random_state!r}")
