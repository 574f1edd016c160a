# Scenario configuration and parameter sweeps for the Homodyne Super-Resolution Simulator

import re
import math
import logging
import itertools
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from tqdm import tqdm

from implementation import bhd, settings
from implementation.beam import BeamGeometry
from implementation.bhd import MisalignmentModel, Receiver, SourcePair
from implementation.channel import Aperture, ChannelLeg, legs_for, rayleigh_limit
from implementation.exceptions import ConfigError, HomodyneError

logger = logging.getLogger(__name__)

SWEEPABLE = ("ell", "n_plus", "n_minus", "eta", "sigma_d", "delta_x", "r",
             "photons_per_source", "photons_total")

CSV_COLUMNS = ["ell", "d_min", "d_rayleigh", "resolved", "margin"]

LENGTH_UNITS = {"m": 1.0, "km": 1e3, "mm": 1e-3, "um": 1e-6, "nm": 1e-9}
ANGLE_UNITS = {"rad": 1.0, "deg": math.pi / 180}
COUNT_UNITS = {"photons": 1.0}

# Config key -> (quantity kind, parameter field)
CONFIG_KEYS = {
    "lambda": ("length", "wavelength"),
    "w0": ("length", "w0"),
    "r": ("length", "r"),
    "ell": ("length", "ell"),
    "ell_plus": ("length", "ell_plus"),
    "ell_minus": ("length", "ell_minus"),
    "d": ("length", "d"),
    "sigma_d": ("length", "sigma_d"),
    "delta_x": ("length", "delta_x"),
    "phi_lo": ("angle", "phi_lo"),
    "phi_plus": ("angle", "phi_plus"),
    "phi_minus": ("angle", "phi_minus"),
    "theta_d": ("angle", "theta_d"),
    "n_plus": ("count", "n_plus"),
    "n_minus": ("count", "n_minus"),
    "n_lo": ("count", "n_lo"),
    "photons_per_source": ("count", "photons_per_source"),
    "photons_total": ("count", "photons_total"),
    "eta": ("ratio", "eta"),
    "field_norm": ("ratio", "field_norm"),
    "misalignment": ("choice", "misalignment"),
}

MISALIGNMENT_CHOICES = {
    "none": "none",
    "fluct": "fluctuating",
    "fluctuating": "fluctuating",
    "fixed": "fixed",
}


class ScenarioParams(BaseModel):
    """Flat, validated scenario; unset values are the baseline example setup"""
    model_config = ConfigDict(frozen=True)

    wavelength: float = Field(default=600e-9, gt=0)
    w0: float = Field(default=0.1, gt=0)
    r: float = Field(default=0.2, gt=0)
    eta: float = Field(default=0.9, gt=0, le=1)
    n_lo: float = Field(default=1e6, gt=0)
    phi_lo: float = 0.0
    field_norm: float = Field(default=1.0, gt=0)
    n_plus: float = Field(default=1e3, ge=0)
    n_minus: float = Field(default=1e3, ge=0)
    ell_plus: float = Field(default=1e5, gt=0)
    ell_minus: float = Field(default=1e5, gt=0)
    phi_plus: float = 0.0
    phi_minus: float = 0.0
    d: float = Field(default=1e-3, ge=0)
    theta_d: float = 0.0
    misalignment: Literal["none", "fluctuating", "fixed"] = "none"
    sigma_d: float = Field(default=0.0, ge=0)
    delta_x: float = 0.0

    def geometry(self) -> BeamGeometry:
        return BeamGeometry(wavelength=self.wavelength, w0=self.w0)

    def aperture(self) -> Aperture:
        return Aperture(r=self.r)

    def pair(self) -> SourcePair:
        return SourcePair(
            n_plus=self.n_plus, n_minus=self.n_minus,
            ell_plus=self.ell_plus, ell_minus=self.ell_minus,
            phi_plus=self.phi_plus, phi_minus=self.phi_minus,
            d=self.d, theta_d=self.theta_d,
        )

    def receiver(self) -> Receiver:
        return Receiver(aperture=self.aperture(), eta=self.eta, n_lo=self.n_lo,
                        phi_lo=self.phi_lo, field_norm=self.field_norm)

    def misalignment_model(self) -> MisalignmentModel:
        if self.misalignment == "fluctuating":
            return MisalignmentModel.fluctuating(self.sigma_d)
        if self.misalignment == "fixed":
            return MisalignmentModel.fixed(self.delta_x)
        return MisalignmentModel.none()

    def legs(self) -> Tuple[ChannelLeg, ChannelLeg]:
        return legs_for(self.geometry(), self.aperture(), self.ell_plus, self.ell_minus)


def _expand_aliases(values: Dict[str, float]) -> Dict[str, float]:
    """Resolve ell / photons_per_source / photons_total into the per-source fields"""
    values = dict(values)
    if "ell" in values:
        ell = values.pop("ell")
        values["ell_plus"] = ell
        values["ell_minus"] = ell
    if "photons_per_source" in values:
        photons = values.pop("photons_per_source")
        values["n_plus"] = photons
        values["n_minus"] = photons
    if "photons_total" in values:
        photons = values.pop("photons_total") / 2
        values["n_plus"] = photons
        values["n_minus"] = photons
    return values


def apply_parameters(params: ScenarioParams, values: Dict[str, float]) -> ScenarioParams:
    """Validated copy of params with the given (possibly aliased) parameters replaced"""
    merged = params.model_dump()
    merged.update(_expand_aliases(values))
    return ScenarioParams.model_validate(merged)


class SweepAxis(BaseModel):
    """One swept parameter: lin/log spaced between min and max, or an explicit list"""
    model_config = ConfigDict(frozen=True)

    name: str
    spacing: Literal["lin", "log", "list"]
    minimum: Optional[float] = None
    maximum: Optional[float] = None
    points: Optional[int] = None
    listed: Tuple[float, ...] = ()

    @model_validator(mode="after")
    def _check_axis(self):
        if self.name not in SWEEPABLE:
            raise ValueError(f"'{self.name}' is not sweepable (allowed: {', '.join(SWEEPABLE)})")
        if self.spacing == "list":
            if not self.listed:
                raise ValueError("list axis needs at least one value")
            return self
        if self.minimum is None or self.maximum is None or self.points is None:
            raise ValueError("lin/log axis needs min, max and points")
        if not self.minimum < self.maximum:
            raise ValueError(f"axis min must be < max, got {self.minimum} >= {self.maximum}")
        if self.points < 2:
            raise ValueError(f"axis needs at least 2 points, got {self.points}")
        if self.spacing == "log" and self.minimum <= 0:
            raise ValueError("log axis needs a positive minimum")
        return self

    def values(self) -> np.ndarray:
        if self.spacing == "list":
            return np.array(self.listed, dtype=float)
        if self.spacing == "log":
            return np.geomspace(self.minimum, self.maximum, self.points)
        return np.linspace(self.minimum, self.maximum, self.points)


class ScenarioConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    params: ScenarioParams = ScenarioParams()
    axes: Tuple[SweepAxis, ...] = ()
    source: Optional[str] = None

    def axis(self, name: str) -> SweepAxis:
        for axis in self.axes:
            if axis.name == name:
                return axis
        raise ConfigError(f"no sweep axis declared for '{name}'", key=name)


class SweepRow(BaseModel):
    """One evaluated sweep cell; resolved holds exactly when margin > 0"""
    model_config = ConfigDict(frozen=True)

    ell: float
    d_min: float
    d_rayleigh: float
    resolved: bool
    margin: float
    axis_values: Dict[str, float] = Field(default_factory=dict)
    error: Optional[str] = None

    @model_validator(mode="after")
    def _check_resolved(self):
        if self.resolved != (self.margin > 0):
            raise ValueError("resolved must hold exactly when margin > 0")
        return self


# ------------------- Config parsing -------------------

_SWEEP_PATTERN = re.compile(r"^sweep\s+(\S+)\s+(\S+)\s*(.*)$")


def _parse_number(text: str, key: str, line: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"'{text}' is not a number", key=key, line=line)


def _parse_quantity(key: str, raw: str, line: int):
    kind, _ = CONFIG_KEYS[key]
    tokens = raw.split()
    if not tokens:
        raise ConfigError("missing value", key=key, line=line)

    if kind == "choice":
        choice = MISALIGNMENT_CHOICES.get(tokens[0].lower())
        if choice is None or len(tokens) > 1:
            raise ConfigError(f"expected one of {', '.join(MISALIGNMENT_CHOICES)}, got '{raw}'", key=key, line=line)
        return choice

    if len(tokens) > 2:
        raise ConfigError(f"expected '<value> [unit]', got '{raw}'", key=key, line=line)
    value = _parse_number(tokens[0], key, line)
    unit = tokens[1] if len(tokens) == 2 else None

    if kind == "length":
        if unit is None:
            raise ConfigError(f"length needs an SI unit ({', '.join(LENGTH_UNITS)})", key=key, line=line)
        if unit not in LENGTH_UNITS:
            raise ConfigError(f"unknown length unit '{unit}'", key=key, line=line)
        return value * LENGTH_UNITS[unit]
    if kind == "angle":
        if unit is None:
            return value
        if unit not in ANGLE_UNITS:
            raise ConfigError(f"unknown angle unit '{unit}'", key=key, line=line)
        return value * ANGLE_UNITS[unit]
    if kind == "count":
        if unit is not None and unit not in COUNT_UNITS:
            raise ConfigError(f"photon counts take no unit, got '{unit}'", key=key, line=line)
        return value
    if unit is not None:
        raise ConfigError(f"dimensionless quantity takes no unit, got '{unit}'", key=key, line=line)
    return value


def _parse_sweep(match, line: int) -> SweepAxis:
    name, spacing, rest = match.group(1), match.group(2), match.group(3).split()
    if spacing not in ("lin", "log", "list"):
        raise ConfigError(f"sweep spacing must be lin, log or list, got '{spacing}'", key=name, line=line)
    try:
        if spacing == "list":
            return SweepAxis(name=name, spacing=spacing,
                             listed=tuple(_parse_number(token, name, line) for token in rest))
        if len(rest) != 3:
            raise ConfigError("expected 'sweep <param> <lin|log> <min> <max> <points>'", key=name, line=line)
        points = _parse_number(rest[2], name, line)
        if points != int(points):
            raise ConfigError(f"points must be an integer, got '{rest[2]}'", key=name, line=line)
        return SweepAxis(name=name, spacing=spacing,
                         minimum=_parse_number(rest[0], name, line),
                         maximum=_parse_number(rest[1], name, line),
                         points=int(points))
    except ValidationError as e:
        raise ConfigError(e.errors()[0]["msg"], key=name, line=line)


def parse_config(text: str, source: Optional[str] = None) -> ScenarioConfig:
    """Parse `key = value [unit]` lines and `sweep ...` declarations

    Raises:
        ConfigError: naming the offending key and line
    """
    values: Dict[str, object] = {}
    origins: Dict[str, Tuple[str, int]] = {}
    axes: List[SweepAxis] = []

    for number, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue

        sweep = _SWEEP_PATTERN.match(line)
        if sweep:
            axis = _parse_sweep(sweep, number)
            if any(existing.name == axis.name for existing in axes):
                raise ConfigError("axis declared twice", key=axis.name, line=number)
            axes.append(axis)
            origins[f"axis:{axis.name}"] = (axis.name, number)
            continue

        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got '{line}'", line=number)
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigError("unknown key", key=key, line=number)

        field = CONFIG_KEYS[key][1]
        values[field] = _parse_quantity(key, raw, number)
        for target in _expand_aliases({field: 0.0}):
            origins[target] = (key, number)

    try:
        params = ScenarioParams.model_validate(_expand_aliases(values))
    except ValidationError as e:
        first = e.errors()[0]
        field = str(first["loc"][0]) if first["loc"] else None
        key, number = origins.get(field, (field, None))
        raise ConfigError(first["msg"], key=key, line=number)

    for axis in axes:
        needed = {"sigma_d": "fluctuating", "delta_x": "fixed"}.get(axis.name)
        if needed and params.misalignment != needed:
            key, number = origins[f"axis:{axis.name}"]
            raise ConfigError(f"sweeping {axis.name} needs misalignment = "
                              f"{'fluct' if needed == 'fluctuating' else 'fixed'}", key=key, line=number)

    for field, variant in (("sigma_d", "fluctuating"), ("delta_x", "fixed")):
        if field in origins and params.misalignment != variant:
            key, number = origins[field]
            raise ConfigError(f"{field} only applies with misalignment = "
                              f"{'fluct' if variant == 'fluctuating' else 'fixed'}", key=key, line=number)

    return ScenarioConfig(params=params, axes=tuple(axes), source=source)


def load_config(path: str) -> ScenarioConfig:
    """Read a scenario config file; an empty file yields the baseline defaults"""
    with open(path, 'r') as f:
        text = f.read()
    config = parse_config(text, source=path)
    logger.info(f"Loaded scenario config from {path} with {len(config.axes)} sweep axes")
    return config


# ------------------- Evaluation -------------------

def evaluate_point(params: ScenarioParams) -> bhd.SuperResolutionCheck:
    """Direct bhd evaluation of one scenario with its configured misalignment"""
    return bhd.super_resolution_check(params.pair(), params.geometry(), params.receiver(),
                                      params.legs(), params.misalignment_model())


def _evaluate_cell(base: ScenarioParams, names: Sequence[str], cell: Sequence[float]) -> SweepRow:
    axis_values = {name: float(value) for name, value in zip(names, cell)}
    extras = {name: value for name, value in axis_values.items() if name != "ell"}
    ell = axis_values.get("ell", 0.5 * (base.ell_plus + base.ell_minus))

    try:
        params = apply_parameters(base, axis_values)
        check = evaluate_point(params)
        return SweepRow(ell=ell, d_min=check.d_min, d_rayleigh=check.d_rayleigh,
                        resolved=check.resolved, margin=check.margin, axis_values=extras)
    except (HomodyneError, ValidationError) as e:
        reason = str(e).splitlines()[0] if isinstance(e, HomodyneError) else e.errors()[0]["msg"]
        logger.warning(f"Sweep cell {axis_values} failed: {reason}")
        try:
            d_rayleigh = rayleigh_limit(base.geometry(), ell)
        except HomodyneError:
            d_rayleigh = math.nan
        return SweepRow(ell=ell, d_min=math.nan, d_rayleigh=d_rayleigh, resolved=False,
                        margin=math.nan, axis_values=extras, error=reason)


def _rows_to_table(rows: Sequence[SweepRow], extra_names: Sequence[str]) -> pd.DataFrame:
    records = []
    for row in rows:
        record = {column: getattr(row, column) for column in CSV_COLUMNS}
        for name in extra_names:
            record[name] = row.axis_values[name]
        if row.error is not None:
            record["error"] = row.error
        records.append(record)

    columns = CSV_COLUMNS + list(extra_names)
    if any(row.error is not None for row in rows):
        columns.append("error")
    return pd.DataFrame.from_records(records, columns=columns)


def run_sweep(cfg: ScenarioConfig, show_progress: bool = settings.SHOW_PROGRESS,
              workers: int = 1) -> pd.DataFrame:
    """Evaluate the Cartesian product of the sweep axes, row-major in declaration order

    Cell failures are recorded in the row's error column; the sweep carries on.

    Args:
        cfg: Scenario config
        show_progress: Show a tqdm progress bar
        workers: Thread count; row order is identical for any value

    Returns:
        DataFrame with columns ell,d_min,d_rayleigh,resolved,margin plus one per extra axis
    """
    names = [axis.name for axis in cfg.axes]
    cells = list(itertools.product(*(axis.values() for axis in cfg.axes)))
    logger.info(f"Running sweep over {names or ['<single point>']} with {len(cells)} cells")

    def evaluate(cell):
        return _evaluate_cell(cfg.params, names, cell)

    progress = dict(total=len(cells), desc="sweep", disable=not show_progress)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(tqdm(pool.map(evaluate, cells), **progress))
    else:
        rows = [evaluate(cell) for cell in tqdm(cells, **progress)]

    failed = sum(row.error is not None for row in rows)
    if failed:
        logger.warning(f"{failed} of {len(rows)} sweep cells failed")
    logger.info(f"Sweep complete: {sum(row.resolved for row in rows)} of {len(rows)} cells resolved")
    return _rows_to_table(rows, [name for name in names if name != "ell"])


def run_region(cfg: ScenarioConfig, axis1: str, axis2: str,
               show_progress: bool = settings.SHOW_PROGRESS) -> pd.DataFrame:
    """2D super-resolution map over two declared axes, axis1-major"""
    if axis1 == axis2:
        raise ConfigError("region axes must differ", key=axis2)
    region_cfg = cfg.model_copy(update={"axes": (cfg.axis(axis1), cfg.axis(axis2))})
    table = run_sweep(region_cfg, show_progress=show_progress)

    columns = [axis1, axis2, "d_min", "d_rayleigh", "resolved", "margin"]
    if "error" in table.columns:
        columns.append("error")
    logger.info(f"Region map {axis1} x {axis2}: {int(table['resolved'].sum())} of {len(table)} cells resolved")
    return table[columns]
