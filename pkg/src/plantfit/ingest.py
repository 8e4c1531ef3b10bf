"""Loading, validation, and alignment of market and plant time series.

CSV schemas (header row required, comma-separated, UTF-8, timestamps in
ISO-8601 UTC):

    prices.csv      timestamp_utc, electricity_gbp_mwh, fuel_gbp_mwh_fuel,
                    carbon_gbp_tco2   (each column may also live in its own
                    file with its own native resolution)
    production.csv  timestamp_utc, mw
    dynamics.csv    timestamp_utc, mel_mw, sel_mw, ramp_up_mw_per_h,
                    ramp_dn_mw_per_h

Daily values repeat over every period of their day, hourly values over
every sub-hourly period; price gaps up to one day are forward-filled,
production and dynamic data must cover the horizon without gaps.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .domain import (
    DataError,
    MarketSeries,
    ObservedProduction,
    PlantDynamics,
    PlantParameters,
)
from .uc import SolverOptions, UcInstance, solve_uc

RESOLUTION_HOURS = {"half-hourly": 0.5, "hourly": 1.0, "daily": 24.0}

# longest price gap bridged by forward-fill, in hours
MAX_PRICE_GAP_HOURS = 24.0


def parse_timestamp(text: str) -> np.datetime64:
    """ISO-8601 to UTC datetime64[s]; naive values are taken as UTC."""
    raw = text.strip()
    try:
        stamp = datetime.fromisoformat(raw.replace("Z", "+00:00"))
    except ValueError as exc:
        raise DataError(f"unparseable timestamp: {raw!r}") from exc
    if stamp.tzinfo is not None:
        stamp = stamp.astimezone(timezone.utc).replace(tzinfo=None)
    return np.datetime64(stamp.isoformat(), "s")


def format_timestamp(stamp: np.datetime64) -> str:
    return np.datetime_as_string(stamp.astype("datetime64[s]"), unit="s") + "Z"


def make_grid(start, periods: int, dt: float) -> np.ndarray:
    """Uniform settlement grid of ``periods`` steps of ``dt`` hours."""
    if periods < 1:
        raise DataError("grid needs at least one period")
    step_s = dt * 3600.0
    if abs(step_s - round(step_s)) > 1e-9 or step_s <= 0:
        raise DataError("dt must be a positive whole number of seconds")
    t0 = parse_timestamp(start) if isinstance(start, str) else np.datetime64(start, "s")
    return t0 + np.arange(periods) * np.timedelta64(int(round(step_s)), "s")


@dataclass(frozen=True)
class ColumnSpec:
    """Names of the timestamp and value columns to read from a CSV file."""

    timestamp: str = "timestamp_utc"
    value: str = "value"


@dataclass(frozen=True, eq=False)
class RawSeries:
    """One loaded (timestamp, value) series at its native resolution."""

    timestamps: np.ndarray  # datetime64[s], strictly increasing
    values: np.ndarray
    resolution: str  # half-hourly | hourly | daily

    def __post_init__(self):
        ts = np.array(self.timestamps, dtype="datetime64[s]")
        vals = np.array(self.values, dtype=float)
        ts.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "values", vals)
        if self.resolution not in RESOLUTION_HOURS:
            raise DataError(f"unknown resolution: {self.resolution!r}")
        if len(ts) != len(vals):
            raise DataError("timestamps and values length mismatch")
        if len(ts) == 0:
            raise DataError("series is empty")
        if np.any(np.diff(ts).astype(float) <= 0):
            raise DataError("timestamps must be strictly increasing")
        if not np.all(np.isfinite(vals)):
            raise DataError("series contains non-finite values")

    def __len__(self) -> int:
        return len(self.timestamps)


def load_series(path, schema: ColumnSpec, resolution: str) -> RawSeries:
    """Read one series from a CSV file, rejecting malformed rows by line."""
    path = Path(path)
    if resolution not in RESOLUTION_HOURS:
        raise DataError(f"unknown resolution: {resolution!r}")
    timestamps: list[np.datetime64] = []
    values: list[float] = []
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise DataError(f"{path}: missing header row")
        for col in (schema.timestamp, schema.value):
            if col not in reader.fieldnames:
                raise DataError(f"{path}: missing column {col!r}")
        for row in reader:
            line = reader.line_num
            try:
                stamp = parse_timestamp(row[schema.timestamp])
            except DataError as exc:
                raise DataError(f"{path}:{line}: {exc}") from None
            try:
                value = float(row[schema.value])
            except (TypeError, ValueError):
                raise DataError(f"{path}:{line}: unparseable value {row[schema.value]!r}") from None
            if not math.isfinite(value):
                raise DataError(f"{path}:{line}: non-finite value in column {schema.value!r}")
            if timestamps:
                if stamp == timestamps[-1]:
                    raise DataError(f"{path}:{line}: duplicate timestamp {format_timestamp(stamp)}")
                if stamp < timestamps[-1]:
                    raise DataError(f"{path}:{line}: decreasing timestamp {format_timestamp(stamp)}")
            timestamps.append(stamp)
            values.append(value)
    if not timestamps:
        raise DataError(f"{path}: no data rows")
    return RawSeries(np.array(timestamps), np.array(values), resolution)


@dataclass(frozen=True, eq=False)
class AlignedDataset:
    """Everything one fit needs, on a single uniform grid."""

    market: MarketSeries
    dynamics: PlantDynamics
    observed: ObservedProduction
    dt: float  # hours


def _resample(series: RawSeries, grid: np.ndarray, name: str,
              max_fill_hours: float) -> np.ndarray:
    """Map a raw series onto the grid by step repetition and forward-fill.

    A row at time tau covers [tau, tau + native resolution); grid points
    past coverage are forward-filled up to ``max_fill_hours`` (zero for
    series that must cover the horizon exactly).
    """
    res_s = RESOLUTION_HOURS[series.resolution] * 3600.0
    ts = series.timestamps.astype("datetime64[s]").astype(np.int64)
    gs = grid.astype("datetime64[s]").astype(np.int64)
    idx = np.searchsorted(ts, gs, side="right") - 1
    if np.any(idx < 0):
        first = grid[int(np.argmin(idx))]
        raise DataError(f"gap in {name}: horizon starts {format_timestamp(first)} "
                        f"before first data row")
    coverage_end = ts[idx] + res_s
    gap_s = gs - coverage_end  # >= 0 where the grid point lies past coverage
    if max_fill_hours == 0.0:
        bad = gap_s >= 0
    else:
        bad = gap_s > max_fill_hours * 3600.0 + 1e-9
    if np.any(bad):
        t_bad = grid[int(np.argmax(bad))]
        raise DataError(f"gap in {name} at {format_timestamp(t_bad)}")
    return series.values[idx]


def align(
    series: dict[str, RawSeries],
    dt: float,
    start,
    end,
    max_price_gap_hours: float = MAX_PRICE_GAP_HOURS,
) -> AlignedDataset:
    """Project raw series onto one uniform grid covering [start, end).

    ``series`` must provide electricity, fuel, carbon, production, mel, sel,
    ramp_up, and ramp_dn. Prices may be forward-filled across short gaps;
    production and dynamic data must cover every period. The single ramp
    rate the model uses is the most restrictive value over the horizon.
    """
    required = ("electricity", "fuel", "carbon", "production",
                "mel", "sel", "ramp_up", "ramp_dn")
    missing = [k for k in required if k not in series]
    if missing:
        raise DataError(f"missing series: {', '.join(missing)}")
    t0 = parse_timestamp(start) if isinstance(start, str) else np.datetime64(start, "s")
    t1 = parse_timestamp(end) if isinstance(end, str) else np.datetime64(end, "s")
    span_s = (t1 - t0).astype("timedelta64[s]").astype(float)
    step_s = dt * 3600.0
    if span_s <= 0:
        raise DataError("horizon start must precede end")
    periods = int(round(span_s / step_s))
    if abs(periods * step_s - span_s) > 1e-6 or periods < 1:
        raise DataError("horizon is not a whole number of dt steps")
    grid = make_grid(t0, periods, dt)

    w = _resample(series["electricity"], grid, "electricity prices", max_price_gap_hours)
    f = _resample(series["fuel"], grid, "fuel prices", max_price_gap_hours)
    e = _resample(series["carbon"], grid, "carbon prices", max_price_gap_hours)
    production = _resample(series["production"], grid, "observed production", 0.0)
    mel = _resample(series["mel"], grid, "MEL", 0.0)
    sel = _resample(series["sel"], grid, "SEL", 0.0)
    ramp_up = _resample(series["ramp_up"], grid, "ramp-up rate", 0.0)
    ramp_dn = _resample(series["ramp_dn"], grid, "ramp-down rate", 0.0)

    market = MarketSeries(grid=grid, w=w, f=f, e=e, dt=dt)
    dynamics = PlantDynamics(
        mel=mel, sel=sel,
        ramp_up=float(ramp_up.min()), ramp_dn=float(ramp_dn.min()),
    )
    observed = ObservedProduction(grid=grid, power=production)
    return AlignedDataset(market=market, dynamics=dynamics, observed=observed, dt=dt)


def synthesize(
    params: PlantParameters,
    dynamics: PlantDynamics,
    market: MarketSeries,
    opts: SolverOptions | None = None,
    noise: float = 0.0,
    seed: int = 0,
    initial_committed: bool = False,
    initial_power: float = 0.0,
) -> ObservedProduction:
    """Closed-loop test data: the optimal schedule plus optional noise.

    Gaussian noise of the given standard deviation [MW] is added per period
    and clipped to [0, mel_t]; the caller-supplied seed makes it repeatable.
    """
    if noise < 0:
        raise DataError("noise must be non-negative")
    instance = UcInstance(
        params=params, dynamics=dynamics, market=market,
        initial_committed=initial_committed, initial_power=initial_power,
    )
    schedule = solve_uc(instance, opts or SolverOptions())
    power = np.asarray(schedule.power, dtype=float)
    if noise > 0:
        rng = np.random.default_rng(seed)
        power = np.clip(power + rng.normal(0.0, noise, len(power)), 0.0, dynamics.mel)
    return ObservedProduction(grid=market.grid, power=power)
