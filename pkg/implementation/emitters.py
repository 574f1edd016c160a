# CSV and SVG emission for the Homodyne Super-Resolution Simulator

import os
import logging
from typing import List, Optional, Tuple

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict

from implementation.exceptions import DomainError

logger = logging.getLogger(__name__)

# Fixed so repeated renders of the same table give byte-identical SVG
_SVG_RC = {
    "svg.hashsalt": "homodyne-super-resolution",
    "svg.fonttype": "none",
}

_RESERVED = {"ell", "d_min", "d_rayleigh", "resolved", "margin", "error"}


class PlotSpec(BaseModel):
    """What to draw from a sweep table

    curve_by defaults to every extra axis column in the table.
    """
    model_config = ConfigDict(frozen=True)

    x: str = "ell"
    y: str = "d_min"
    curve_by: Optional[Tuple[str, ...]] = None
    title: Optional[str] = None
    shade_region: bool = True

    def curves_for(self, table: pd.DataFrame) -> List[str]:
        if self.curve_by is not None:
            missing = [name for name in self.curve_by if name not in table.columns]
            if missing:
                raise DomainError(f"plot curve columns missing from table: {missing}")
            return list(self.curve_by)
        return [column for column in table.columns if column not in _RESERVED]


def _ensure_parent(path: str):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)


def emit_csv(table: pd.DataFrame, path: str) -> str:
    """Write a sweep table as CSV in row order with round-trip float precision

    Raises:
        DomainError: if the table is empty
    """
    if table.empty:
        raise DomainError("refusing to write an empty table")
    _ensure_parent(path)
    table.to_csv(path, index=False, lineterminator="\n")
    logger.info(f"Wrote {len(table)} rows to {path}")
    return path


def _label(keys, names: List[str]) -> str:
    if not names:
        return "d_min"
    if not isinstance(keys, tuple):
        keys = (keys,)
    return ", ".join(f"{name}={value:g}" for name, value in zip(names, keys))


def emit_plot(table: pd.DataFrame, spec: PlotSpec, path: str) -> str:
    """Render a sweep table as a static log-log SVG

    One series per combination of curve columns (gid "series-<k>"), the
    d_rayleigh reference (gid "d-rayleigh") and the shaded region below it
    (gid "super-resolution-region").

    Args:
        table: Sweep table, normally read back from the emitted CSV
        spec: Plot description
        path: Destination SVG path

    Returns:
        The path written
    """
    if table.empty:
        raise DomainError("refusing to plot an empty table")
    for column in (spec.x, spec.y, "d_rayleigh"):
        if column not in table.columns:
            raise DomainError(f"plot column '{column}' missing from table")

    names = spec.curves_for(table)
    data = table[np.isfinite(table[spec.y]) & (table[spec.y] > 0)]

    with plt.rc_context(_SVG_RC):
        fig, ax = plt.subplots(figsize=(7, 5))
        ax.set_xscale("log")
        ax.set_yscale("log")

        gids = []
        groups = data.groupby(names, sort=False) if names else [((), data)]
        for keys, curve in groups:
            curve = curve.sort_values(spec.x)
            (line,) = ax.plot(curve[spec.x], curve[spec.y], label=_label(keys, names))
            gids.append((line, f"series-{len(gids)}"))
        series = len(gids)

        reference = table[[spec.x, "d_rayleigh"]].dropna().drop_duplicates(spec.x).sort_values(spec.x)
        (rayleigh,) = ax.plot(reference[spec.x], reference["d_rayleigh"], color="black",
                              linestyle="--", label="d_rayleigh")
        gids.append((rayleigh, "d-rayleigh"))

        if spec.shade_region and not reference.empty:
            positive = pd.concat([data[spec.y], reference["d_rayleigh"]])
            floor = positive[positive > 0].min() / 10
            region = ax.fill_between(reference[spec.x], floor, reference["d_rayleigh"],
                                     color="tab:green", alpha=0.15, label="super-resolution")
            gids.append((region, "super-resolution-region"))

        ax.set_xlabel(f"{spec.x} [m]")
        ax.set_ylabel(f"{spec.y} [m]")
        if spec.title:
            ax.set_title(spec.title)
        ax.legend(fontsize="small")
        # After the legend, so its proxy artists stay anonymous
        for artist, gid in gids:
            artist.set_gid(gid)

        _ensure_parent(path)
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)

    logger.info(f"Wrote plot with {series} series to {path}")
    return path


def emit_modes(x: np.ndarray, intensity: np.ndarray, path: str) -> str:
    """Write a sampled |u_n(x, z)|^2 profile as x,intensity CSV"""
    return emit_csv(pd.DataFrame({"x": x, "intensity": intensity}), path)
