"""Artifact writers: delimited text, JSON summaries, and figure rendering.

CSV files carry '#'-prefixed header comments (scenario name + config hash)
and 12-significant-digit decimals; JSON uses sorted keys.  Reruns of the
same scenario byte-reproduce every CSV/JSON artifact.  Figures are SVG
line/contour plots rendered next to the delimited output; their XML ids
are salted with the config hash so they are stable too.
"""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .kernels import AmplitudeTrace
from .spectra import SpectrumGrid


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def write_csv(path: Path, columns: list[tuple[str, np.ndarray]],
              provenance: list[str]) -> None:
    names = [name for name, _ in columns]
    arrays = [np.atleast_1d(arr) for _, arr in columns]
    n = len(arrays[0])
    lines = [f"# {line}" for line in provenance]
    lines.append(",".join(names))
    for i in range(n):
        lines.append(",".join(fmt(arr[i]) if not isinstance(arr[i], str) else arr[i]
                              for arr in arrays))
    Path(path).write_text("\n".join(lines) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(f"{float(obj):.12g}")
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj]
    return obj


def write_json(path: Path, payload: dict, provenance: list[str]) -> None:
    body = dict(payload)
    for line in provenance:
        key, _, value = line.partition(": ")
        body[key] = value
    Path(path).write_text(json.dumps(_jsonable(body), sort_keys=True, indent=2) + "\n")


def write_matrix(path: Path, grid: SpectrumGrid, provenance: list[str]) -> None:
    """Row-major text matrix of a 2D spectrum, axes described in comments."""
    y, z = grid.axes
    header = [f"# {line}" for line in provenance]
    header.append(f"# rows: omega_y from {fmt(y[0])} step {fmt(y[1]-y[0])} count {y.size}")
    header.append(f"# cols: omega_z from {fmt(z[0])} step {fmt(z[1]-z[0])} count {z.size}")
    body = "\n".join(" ".join(fmt(v) for v in row) for row in grid.values)
    Path(path).write_text("\n".join(header) + "\n" + body + "\n")


def spectrum_csv(path: Path, grid: SpectrumGrid, provenance: list[str]) -> None:
    meta = provenance + [f"tag: {grid.tag}", f"mass: {fmt(grid.mass)}"]
    if grid.ndim == 1:
        write_csv(path, [("omega", grid.axes[0]), ("value", grid.values)], meta)
        return
    y, z = grid.axes
    yy = np.repeat(y, z.size)
    zz = np.tile(z, y.size)
    write_csv(path, [("omega_y", yy), ("omega_z", zz),
                     ("value", grid.values.ravel())], meta)


def _figure(hashsalt: str):
    plt.rcParams["svg.hashsalt"] = hashsalt
    return plt.figure(figsize=(6.0, 4.0))


def _save(fig, path: Path) -> None:
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_traces(path: Path, traces: list[AmplitudeTrace], hashsalt: str) -> None:
    fig = _figure(hashsalt)
    ax = fig.add_subplot(1, 1, 1)
    for tr in traces:
        ax.semilogy(tr.times, tr.probability, label=tr.method, lw=1.2)
    ax.set_xlabel("t")
    ax.set_ylabel("survival probability")
    ax.legend()
    ax.grid(True, alpha=0.3)
    _save(fig, path)


def plot_spectra_1d(path: Path, grids: list[SpectrumGrid], hashsalt: str,
                    xlabel: str = "omega") -> None:
    fig = _figure(hashsalt)
    ax = fig.add_subplot(1, 1, 1)
    for g in grids:
        ax.plot(g.axes[0], g.values, label=g.tag, lw=1.1)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("spectral density")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    _save(fig, path)


def plot_joint(path: Path, grid: SpectrumGrid, hashsalt: str) -> None:
    fig = _figure(hashsalt)
    ax = fig.add_subplot(1, 1, 1)
    y, z = grid.axes
    floor = grid.values.max() * 1e-8 + 1e-300
    ax.contour(z, y, np.log10(grid.values + floor), levels=12, linewidths=0.8)
    ax.set_xlabel("omega_z")
    ax.set_ylabel("omega_y")
    ax.set_title("log10 joint spectrum (ridge: omega_y + omega_z = const)",
                 fontsize=9)
    _save(fig, path)


def plot_zeno(path: Path, lambda1, rate_perturbed, shift_perturbed, golden,
              hashsalt: str) -> None:
    fig = _figure(hashsalt)
    ax = fig.add_subplot(1, 1, 1)
    ax.loglog(lambda1, rate_perturbed, "o-", ms=3, lw=1.0, label="perturbed rate")
    ax.axhline(golden, color="k", ls="--", lw=0.8, label="golden rule")
    shift = np.abs(np.asarray(shift_perturbed))
    positive = shift > 0
    if np.any(positive):
        ax.loglog(np.asarray(lambda1)[positive], shift[positive], "s-",
                  ms=3, lw=1.0, label="|perturbed shift|")
    ax.set_xlabel("intermediate half-rate")
    ax.set_ylabel("rate / shift")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    _save(fig, path)


def plot_populations(path: Path, times, p0, p1, p2, hashsalt: str) -> None:
    fig = _figure(hashsalt)
    ax = fig.add_subplot(1, 1, 1)
    ax.plot(times, p0, label="initial", lw=1.2)
    ax.plot(times, p1, label="intermediate", lw=1.2)
    ax.plot(times, p2, label="two-quantum", lw=1.2)
    ax.set_xlabel("t")
    ax.set_ylabel("sector population")
    ax.legend()
    ax.grid(True, alpha=0.3)
    _save(fig, path)
