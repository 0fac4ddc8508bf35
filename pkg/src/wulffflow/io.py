"""Artifact writers: CSV tables, key-value reports and OBJ meshes."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

FLOW_SCHEMA = "wulffflow-flow/1"


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def flow_columns(n: int) -> list[str]:
    return (["t", "vol"] + [f"v{m}" for m in range(n + 2)]
            + ["i_k", "s_min", "s_max", "kappa_min", "kappa_max"]
            + [f"mink_res_{j}" for j in range(n)] + ["umbilicity", "sup_speed"])


def write_table(path, columns, rows, comment: str | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        w = csv.writer(fh)
        w.writerow(columns)
        for row in rows:
            values = [row[c] for c in columns] if isinstance(row, dict) else row
            w.writerow([_fmt(v) for v in values])
    return path


def write_flow_csv(path, records, n: int) -> Path:
    return write_table(path, flow_columns(n), [r.row() for r in records],
                       comment=f"schema: {FLOW_SCHEMA}")


def read_table(path) -> tuple[list[str], np.ndarray]:
    """Read a numeric CSV written by :func:`write_table` (comment lines skipped)."""
    with Path(path).open() as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    data = np.array([[float(v) for v in row] for row in reader], dtype=float)
    return header, data.reshape(-1, len(header))


def write_final_state(path, grid, field, support, points) -> Path:
    dim = grid.n + 1
    theta = np.broadcast_to(grid.theta[:, None], grid.shape).ravel()
    phi = np.broadcast_to(grid.phi[None, :], grid.shape).ravel()
    x = grid.x.reshape(-1, dim)
    pts = np.asarray(points).reshape(-1, dim)
    cols = (["theta", "phi"] + [f"x{i}" for i in range(dim)] + ["field", "s"]
            + [f"X{i}" for i in range(dim)])
    rows = [[theta[i], phi[i], *x[i], field.ravel()[i], support.ravel()[i], *pts[i]]
            for i in range(theta.size)]
    return write_table(path, cols, rows)


def write_obj(path, grid, points, n_revolve: int = 64) -> Path:
    """ASCII OBJ in latitude-longitude vertex order, closed with two pole vertices.

    Axisymmetric states are revolved about ``e1``; in dimension above three
    the ``(x0, x1, x2)`` section is exported.
    """
    pts = np.asarray(points, dtype=float)
    if grid.axisymmetric:
        prof = pts[:, 0, :]
        radius = np.linalg.norm(prof[:, 1:], axis=-1)
        ang = 2 * np.pi * np.arange(n_revolve) / n_revolve
        pts = np.stack([np.repeat(prof[:, :1], n_revolve, axis=1),
                        radius[:, None] * np.cos(ang), radius[:, None] * np.sin(ang)], axis=-1)
    nt, nph = pts.shape[:2]
    north = pts[0].mean(axis=0)
    south = pts[-1].mean(axis=0)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    idx = lambda j, k: 2 + j * nph + (k % nph)  # noqa: E731  (1-based, after north)

    def vertex(p):
        return "v " + " ".join(repr(float(c)) for c in p[:3]) + "\n"

    with path.open("w") as fh:
        fh.write(vertex(north))
        for j in range(nt):
            for k in range(nph):
                fh.write(vertex(pts[j, k]))
        last = 2 + nt * nph
        fh.write(vertex(south))
        for k in range(nph):
            fh.write(f"f 1 {idx(0, k)} {idx(0, k + 1)}\n")
        for j in range(nt - 1):
            for k in range(nph):
                fh.write(f"f {idx(j, k)} {idx(j + 1, k)} {idx(j + 1, k + 1)} {idx(j, k + 1)}\n")
        for k in range(nph):
            fh.write(f"f {idx(nt - 1, k + 1)} {idx(nt - 1, k)} {last}\n")
    return path


def write_report(path, items) -> Path:
    """``key: value`` lines."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as fh:
        for key, value in (items.items() if isinstance(items, dict) else items):
            fh.write(f"{key}: {_fmt(value)}\n")
    return path


def read_report(path) -> dict[str, str]:
    out = {}
    for line in Path(path).read_text().splitlines():
        if ": " in line:
            key, value = line.split(": ", 1)
            out[key] = value
    return out
