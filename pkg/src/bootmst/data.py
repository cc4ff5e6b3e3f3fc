"""Returns panels, expert classifications and the synthetic factor model."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .exceptions import PanelError

__all__ = [
    "ReturnsPanel",
    "SectorMap",
    "SynthSpec",
    "load_panel",
    "write_panel",
    "load_sectors",
    "write_sectors",
    "read_wide_csv",
    "log_returns",
    "returns_from_prices",
    "synthesize_panel",
]

PANEL_FORMATS = ("wide",)


@dataclass(frozen=True)
class ReturnsPanel:
    """n elements observed at T synchronous times.

    ``observations`` has shape ``(n, T)``: one row per element. The array is
    copied and made read-only on construction.
    """

    elements: tuple[str, ...]
    observations: np.ndarray
    time_labels: tuple[str, ...] | None = None
    time_name: str = "date"

    def __post_init__(self):
        obs = np.array(self.observations, dtype=np.float64, copy=True)
        elements = tuple(str(e) for e in self.elements)
        if obs.ndim != 2:
            raise PanelError(f"observations must be 2-D, got shape {obs.shape}")
        n, T = obs.shape
        if len(elements) != n:
            raise PanelError(f"{len(elements)} element identifiers for {n} rows")
        if n < 2:
            raise PanelError(f"panel needs at least 2 elements, got {n}")
        if T < 3:
            raise PanelError(f"panel needs at least 3 observations, got {T}")
        if len(set(elements)) != n:
            seen = set()
            dup = next(e for e in elements if e in seen or seen.add(e))
            raise PanelError(f"duplicate element identifier {dup!r}")
        bad = np.argwhere(~np.isfinite(obs))
        if len(bad):
            i, t = bad[0]
            raise PanelError(f"non-finite value at ({t}, {i}) for element {elements[i]!r}")
        flat = np.flatnonzero(np.ptp(obs, axis=1) == 0)
        if len(flat):
            raise PanelError(f"zero variance element {elements[flat[0]]!r}")
        labels = self.time_labels
        if labels is not None:
            labels = tuple(str(x) for x in labels)
            if len(labels) != T:
                raise PanelError(f"{len(labels)} time labels for {T} observations")
        obs.flags.writeable = False
        object.__setattr__(self, "observations", obs)
        object.__setattr__(self, "elements", elements)
        object.__setattr__(self, "time_labels", labels)

    @property
    def n(self) -> int:
        return self.observations.shape[0]

    @property
    def T(self) -> int:
        return self.observations.shape[1]

    def index(self, element: str) -> int:
        return self.elements.index(element)


@dataclass(frozen=True)
class SectorMap:
    """Expert classification: element -> (sector, subsector)."""

    assignments: Mapping[str, tuple[str, str]]

    def __post_init__(self):
        assignments = {str(k): (str(v[0]), str(v[1])) for k, v in self.assignments.items()}
        parent: dict[str, str] = {}
        for element, (sector, sub) in assignments.items():
            if parent.setdefault(sub, sector) != sector:
                raise PanelError(
                    f"subsector {sub!r} appears under sectors {parent[sub]!r} and {sector!r}"
                )
        object.__setattr__(self, "assignments", assignments)

    def labels(self, elements: Sequence[str], level: str = "sector") -> list[str]:
        """Labels at ``level`` ('sector' or 'subsector') for ``elements`` in order."""
        if level not in ("sector", "subsector"):
            raise ValueError(f"level must be 'sector' or 'subsector', got {level!r}")
        k = 0 if level == "sector" else 1
        missing = [e for e in elements if e not in self.assignments]
        if missing:
            raise PanelError(f"element {missing[0]!r} missing from sector map")
        return [self.assignments[e][k] for e in elements]

    def check_covers(self, elements: Sequence[str]) -> None:
        self.labels(elements)


@dataclass(frozen=True)
class SynthSpec:
    """One market factor plus one sector factor per element, Gaussian noise."""

    n_elements: int = 50
    n_sectors: int = 5
    T: int = 250
    market_loading: float = 0.3
    sector_loading: float = 0.5
    noise_scale: float = 0.01
    seed: int = 7

    def __post_init__(self):
        m, s = self.market_loading, self.sector_loading
        if not 0 <= m < 1:
            raise ValueError(f"market_loading must be in [0, 1), got {m}")
        if not 0 <= s < 1:
            raise ValueError(f"sector_loading must be in [0, 1), got {s}")
        if m * m + s * s >= 1:
            raise ValueError(
                f"market_loading**2 + sector_loading**2 = {m * m + s * s:g} must be < 1"
            )
        if self.noise_scale <= 0:
            raise ValueError("noise_scale must be positive")
        if self.n_elements < 2 or self.T < 3 or self.n_sectors < 1:
            raise ValueError("need n_elements >= 2, T >= 3 and n_sectors >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def read_wide_csv(path) -> tuple[str, list[str], list[str], np.ndarray]:
    """Parse a wide CSV: header ``time,<id>,<id>...`` and one row per time.

    Returns ``(time_name, elements, time_labels, values)`` where values has
    shape ``(n, T)``.
    """
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise PanelError(f"cannot read {path}: {exc}") from exc
    if not rows or len(rows[0]) < 2:
        raise PanelError(f"{path}: missing header row")
    header = rows[0]
    elements = header[1:]
    seen = set()
    for e in elements:
        if e in seen:
            raise PanelError(f"{path}: duplicate element identifier {e!r}")
        seen.add(e)
    times, values = [], []
    for r, row in enumerate(rows[1:]):
        if not row:
            continue
        if len(row) != len(header):
            raise PanelError(f"{path}: row {r} has {len(row)} fields, expected {len(header)}")
        times.append(row[0])
        try:
            vals = [float(v) for v in row[1:]]
        except ValueError as exc:
            raise PanelError(f"{path}: row {r}: {exc}") from exc
        for c, v in enumerate(vals):
            if not math.isfinite(v):
                raise PanelError(f"non-finite value at ({r}, {c}) for element {elements[c]!r}")
        values.append(vals)
    arr = np.array(values, dtype=np.float64).reshape(len(values), len(elements)).T
    return header[0], elements, times, arr


def load_panel(path, fmt: str = "wide") -> ReturnsPanel:
    """Load and validate a returns panel; element order follows file columns."""
    if fmt not in PANEL_FORMATS:
        raise ValueError(f"unknown panel format {fmt!r}; expected one of {PANEL_FORMATS}")
    time_name, elements, times, values = read_wide_csv(path)
    return ReturnsPanel(tuple(elements), values, tuple(times), time_name=time_name)


def write_panel(panel: ReturnsPanel, path) -> None:
    times = panel.time_labels
    if times is None:
        times = [str(t) for t in range(panel.T)]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([panel.time_name, *panel.elements])
        for t, label in enumerate(times):
            w.writerow([label, *(repr(float(v)) for v in panel.observations[:, t])])


def load_sectors(path) -> SectorMap:
    """Read ``element,sector,subsector`` CSV (header required)."""
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            rows = [row for row in reader if row]
    except OSError as exc:
        raise PanelError(f"cannot read {path}: {exc}") from exc
    if header is None or [h.strip().lower() for h in header] != ["element", "sector", "subsector"]:
        raise PanelError(f"{path}: header must be element,sector,subsector")
    assignments = {}
    for r, row in enumerate(rows):
        if len(row) != 3:
            raise PanelError(f"{path}: row {r} has {len(row)} fields, expected 3")
        if row[0] in assignments:
            raise PanelError(f"{path}: element {row[0]!r} listed twice")
        assignments[row[0]] = (row[1], row[2])
    return SectorMap(assignments)


def write_sectors(sectors: SectorMap, path, elements: Sequence[str] | None = None) -> None:
    elements = list(sectors.assignments) if elements is None else list(elements)
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["element", "sector", "subsector"])
        for e in elements:
            w.writerow([e, *sectors.assignments[e]])


def log_returns(open_prices, close_prices) -> np.ndarray:
    """Elementwise ``ln(close / open)``; both inputs strictly positive."""
    o = np.asarray(open_prices, dtype=np.float64)
    c = np.asarray(close_prices, dtype=np.float64)
    if o.shape != c.shape:
        raise PanelError(f"price shapes differ: {o.shape} vs {c.shape}")
    if not (np.all(o > 0) and np.all(c > 0)):
        raise PanelError("prices must be strictly positive")
    return np.log(c / o)


def returns_from_prices(open_prices, close_prices, elements=None, time_labels=None) -> ReturnsPanel:
    """Build a returns panel from open and close prices.

    Inputs are either ``(n, T)`` arrays (then ``elements`` is required) or
    paths to wide CSV price files with identical labels.
    """
    if isinstance(open_prices, (str, Path)) or isinstance(close_prices, (str, Path)):
        name_o, el_o, t_o, o = read_wide_csv(open_prices)
        _, el_c, t_c, c = read_wide_csv(close_prices)
        if el_o != el_c or t_o != t_c:
            raise PanelError("open and close price files have different labels")
        return ReturnsPanel(tuple(el_o), log_returns(o, c), tuple(t_o), time_name=name_o)
    if elements is None:
        raise PanelError("element identifiers are required for array inputs")
    return ReturnsPanel(tuple(elements), log_returns(open_prices, close_prices), time_labels)


def synthesize_panel(spec: SynthSpec) -> tuple[ReturnsPanel, SectorMap]:
    """Draw a market + sector factor panel; sectors assigned round-robin.

    ``x[i, t] = scale * (m f[t] + s g[sec(i), t] + sqrt(1 - m^2 - s^2) e[i, t])``
    """
    rng = np.random.default_rng(spec.seed)
    n, k, T = spec.n_elements, spec.n_sectors, spec.T
    m, s = spec.market_loading, spec.sector_loading
    market = rng.standard_normal(T)
    sector_factors = rng.standard_normal((k, T))
    noise = rng.standard_normal((n, T))
    sector_of = np.arange(n) % k
    obs = m * market + s * sector_factors[sector_of] + math.sqrt(1 - m * m - s * s) * noise
    obs *= spec.noise_scale
    width = len(str(n - 1))
    elements = tuple(f"E{i:0{width}d}" for i in range(n))
    sectors = SectorMap({e: (f"S{sector_of[i]}", f"S{sector_of[i]}") for i, e in enumerate(elements)})
    times = tuple(str(t) for t in range(T))
    return ReturnsPanel(elements, obs, times, time_name="t"), sectors
