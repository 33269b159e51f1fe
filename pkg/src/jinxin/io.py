"""File formats: kernel tables, trajectories, study tables and summaries.

Every writer goes through :func:`atomic_write`, so an interrupted run leaves
either the previous file or nothing, never a truncated one.  Floats are
written with 17 significant digits, which round-trips doubles exactly and
makes identical runs produce identical bytes.

Trajectory binary layout ("JXT1"), all little-endian::

    b"JXT1"               4 bytes magic
    n                     int64, nodes per component
    ncomp                 int64, components per frame
    frames                repeated until EOF: float64 t, then ncomp * n float64
                          values, component-major
"""
from __future__ import annotations

import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .green import kernel_split
from .model import Grid, ModelParams

MAGIC = b"JXT1"
_HEADER = struct.Struct("<4sqq")


def fmt(x) -> str:
    return format(float(x), ".17g")


def atomic_write(path, data) -> Path:
    """Write ``data`` (str or bytes) to ``path`` via a temp file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, (bytes, bytearray)) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"newline": "\n"})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


_ENTRIES = ("11", "12", "21", "22")
_KERNELS = ("gamma", "K", "Khyp", "R")


def green_table_header() -> list[str]:
    cols = ["xi", "t"]
    for k in _KERNELS:
        for e in _ENTRIES:
            cols += [f"{k}_{e}_re", f"{k}_{e}_im"]
    return cols


def green_table_rows(xis, ts, p: ModelParams) -> np.ndarray:
    """One row per ``(xi, t)`` pair, ``t`` running fastest."""
    rows = []
    xis = np.asarray(xis, float)
    for xi in xis:
        for t in ts:
            ks = kernel_split(xis.dtype.type(xi), float(t), p)
            row = [xi, t]
            for mat in (ks.gamma_hat, ks.k_hat, ks.khyp_hat, ks.r_hat):
                flat = np.asarray(mat).reshape(4)
                for z in flat:
                    row += [z.real, z.imag]
            rows.append(row)
    return np.array(rows, dtype=float)


def write_green_table(path, xis, ts, p: ModelParams) -> Path:
    rows = green_table_rows(xis, ts, p)
    if not np.all(np.isfinite(rows)):
        raise FloatingPointError("kernel table contains non-finite entries")
    lines = [",".join(green_table_header())]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    return atomic_write(path, "\n".join(lines) + "\n")


def write_trajectory_csv(path, traj) -> Path:
    """Header ``t,comp,v0..v{n-1}``; one row per recorded time and component."""
    n = traj.states.shape[-1]
    lines = [",".join(["t", "comp"] + [f"v{j}" for j in range(n)])]
    for t, frame in zip(traj.times, traj.states):
        for c, comp in enumerate(frame):
            lines.append(",".join([fmt(t), str(c)] + [fmt(v) for v in comp]))
    return atomic_write(path, "\n".join(lines) + "\n")


def read_trajectory_csv(path):
    """Return ``(times, states)`` with ``states`` of shape ``(nt, ncomp, n)``."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    ncomp = int(data[:, 1].max()) + 1
    times = data[::ncomp, 0]
    return times, data[:, 2:].reshape(len(times), ncomp, -1)


def trajectory_bytes(traj) -> bytes:
    nt, ncomp, n = traj.states.shape
    frames = np.empty((nt, 1 + ncomp * n), dtype="<f8")
    frames[:, 0] = traj.times
    frames[:, 1:] = traj.states.reshape(nt, -1)
    return _HEADER.pack(MAGIC, n, ncomp) + frames.tobytes()


def write_trajectory_binary(path, traj) -> Path:
    return atomic_write(path, trajectory_bytes(traj))


def read_trajectory_binary(path):
    """Return ``(times, states)`` from a JXT1 file."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError("file too short for a JXT1 header")
    magic, n, ncomp = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    body = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    width = 1 + ncomp * n
    if body.size % width:
        raise ValueError("truncated JXT1 frame")
    body = body.reshape(-1, width)
    return body[:, 0].copy(), body[:, 1:].reshape(-1, ncomp, n).copy()


def study_csv_text(result) -> str:
    """Main table, extra series as ``#series`` lines, fits as ``#fit`` lines."""
    items = list(result.table.items())
    nrows = len(items[0][1])
    body = [(k, v) for k, v in items if len(v) == nrows]
    rest = [(k, v) for k, v in items if len(v) != nrows]
    lines = [",".join(k for k, _ in body)]
    for i in range(nrows):
        lines.append(",".join(fmt(v[i]) for _, v in body))
    for k, v in rest:
        lines.append(f"#series {k}=" + ",".join(fmt(x) for x in v))
    for name, f in result.fits.items():
        lines.append(
            f"#fit {name} exponent={fmt(f.exponent)} t_lo={fmt(f.window[0])} "
            f"t_hi={fmt(f.window[1])} residual={fmt(f.residual)} n_points={f.n_points}"
        )
    for name, v in (result.epsilon_slopes or {}).items():
        lines.append(f"#fit eps_slope_{name} slope={fmt(v)}")
    return "\n".join(lines) + "\n"


def write_study_csv(path, result) -> Path:
    return atomic_write(path, study_csv_text(result))


def summary_text(pairs: dict) -> str:
    return "".join(f"{k}={v}\n" for k, v in pairs.items())


def write_summary(path, pairs: dict) -> Path:
    return atomic_write(path, summary_text(pairs))


def read_summary(path) -> dict[str, str]:
    out = {}
    for line in Path(path).read_text().splitlines():
        if line and not line.startswith("#"):
            k, _, v = line.partition("=")
            out[k] = v
    return out


def grid_from(n: int, length: float) -> Grid:
    return Grid(n, length)
