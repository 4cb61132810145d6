"""
Artifact Emission
JSON for models, CSV for tables, SVG plots through matplotlib (Agg)
"""
import logging
from pathlib import Path
from typing import Any, Dict, Sequence, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from pydantic import BaseModel, TypeAdapter  # noqa: E402

from app.models.grid import GridFunction  # noqa: E402
from app.models.spectral import SpectralData  # noqa: E402
from app.models.surface import EmbeddedSurface  # noqa: E402

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def output_paths(out: PathLike) -> Dict[str, Path]:
    """<stem>.json, <stem>.csv and <stem>.svg next to out."""
    out = Path(out)
    stem = out.with_suffix("") if out.suffix else out
    return {ext: stem.with_name(f"{stem.name}.{ext}") for ext in ("json", "csv", "svg")}


def _prepare(path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_json(path: PathLike, payload: Any) -> Path:
    """Write a pydantic model (or a list of them, or a plain dict) as JSON."""
    path = _prepare(path)
    if isinstance(payload, BaseModel):
        text = payload.model_dump_json(indent=2, by_alias=True)
    else:
        text = TypeAdapter(Any).dump_json(payload, indent=2, by_alias=True).decode()
    path.write_text(text)
    logger.debug(f"wrote {path}")
    return path


def write_csv(path: PathLike, columns: Dict[str, Sequence[float]]) -> Path:
    """Columns of equal length as a comma-separated table with a header row."""
    path = _prepare(path)
    names = list(columns)
    table = np.column_stack([np.asarray(columns[name], dtype=float) for name in names])
    np.savetxt(path, table, delimiter=",", header=",".join(names), comments="", fmt="%.16g")
    logger.debug(f"wrote {path} ({table.shape[0]} rows)")
    return path


def write_grid_csv(path: PathLike, f: GridFunction, name: str = "value") -> Path:
    rows = f.to_rows()
    return write_csv(path, {"x": rows[:, 0], name: rows[:, 1]})


def _save(fig, path: PathLike) -> Path:
    path = _prepare(path)
    fig.savefig(path, format="svg")
    plt.close(fig)
    logger.debug(f"wrote {path}")
    return path


def plot_spectrum(path: PathLike, data: SpectralData) -> Path:
    """mu_n and tilde_mu_n against n."""
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    top.plot(data.indices, data.mu, "o-", label="mu_n")
    top.plot(data.indices, data.baseline + data.c0, "--", label="baseline + c0")
    top.set_ylabel("mu_n")
    top.legend()
    top.grid(True)
    bottom.plot(data.indices, data.tilde_mu, "s-", color="tab:red")
    bottom.set_xlabel("n")
    bottom.set_ylabel("tilde mu_n")
    bottom.grid(True)
    fig.suptitle(f"Spectrum ({data.bc})")
    return _save(fig, path)


def plot_silhouette(path: PathLike, surface: EmbeddedSurface) -> Path:
    """Profile f(x) and its mirror -f(x)."""
    f = surface.f_samples
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(f.x, f.values, color="tab:blue")
    ax.plot(f.x, -f.values, color="tab:blue")
    ax.fill_between(f.x, -f.values, f.values, alpha=0.15)
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("f(x)")
    ax.set_title(f"Surface of revolution, x0 = {surface.x0:.6f}")
    ax.grid(True)
    return _save(fig, path)


def plot_grid_function(path: PathLike, f: GridFunction, label: str = "f") -> Path:
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(f.x, f.values)
    ax.set_xlabel("x")
    ax.set_ylabel(label)
    ax.grid(True)
    return _save(fig, path)
