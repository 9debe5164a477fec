"""Output files: 16-bit PGM images, the per-step trace CSV and the text report.

Image layout: a field with values ``v[i, j] = f(x_i, y_j)`` is written with
image row ``j`` holding ``y_j``, so rows run top to bottom in increasing
``y`` and columns left to right in increasing ``x``.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .grid import GridFunction

TRACE_HEADER = "sweep,i,residual,mu,skipped,R_n,bregman"
MAXVAL = 65535


def quantize(values: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Linear map of ``[lo, hi]`` onto ``0..65535``, clipped, rounded to nearest."""
    if not hi > lo:
        return np.zeros(values.shape, dtype=np.uint16)
    scaled = (np.asarray(values, dtype=float) - lo) / (hi - lo) * MAXVAL
    return np.rint(np.clip(scaled, 0.0, MAXVAL)).astype(np.uint16)


def write_pgm(field: GridFunction, path, range: tuple | None = None) -> None:
    """Write a binary 16-bit PGM (P5).

    ``range`` is ``(lo, hi)``; by default the field's min and max.  A field
    with ``lo == hi`` is written as all zeros.
    """
    v = field.values
    lo, hi = (float(v.min()), float(v.max())) if range is None else map(float, range)
    img = quantize(v.T, lo, hi)
    rows, cols = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{cols} {rows}\n{MAXVAL}\n".encode("ascii"))
        fh.write(img.astype(">u2").tobytes())


def read_pgm(path) -> np.ndarray:
    """Read a binary PGM written by :func:`write_pgm`; returns ``(rows, cols)`` integers."""
    data = Path(path).read_bytes()
    tokens, pos = [], 0
    while len(tokens) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        end = pos
        while not data[end:end + 1].isspace():
            end += 1
        tokens.append(data[pos:end].decode("ascii"))
        pos = end
    magic, cols, rows, maxval = tokens[0], int(tokens[1]), int(tokens[2]), int(tokens[3])
    if magic != "P5":
        raise ValueError(f"not a binary PGM: magic {magic!r}")
    dtype = ">u2" if maxval > 255 else "u1"
    pixels = np.frombuffer(data[pos + 1:], dtype=dtype, count=rows * cols)
    return pixels.reshape(rows, cols).astype(np.int64)


def _g(v: float) -> str:
    if isinstance(v, float) and math.isnan(v):
        return "nan"
    return "%.17g" % v


def trace_rows(state, n_eq: int):
    """``(sweep, i, residual, mu, skipped, R_n, bregman)`` for every recorded step.

    ``R_n`` is the sweep's residual sum and ``bregman`` the Bregman distance
    to the reference at the start of the sweep (``nan`` without a reference).
    """
    for s in state.steps:
        r_n = state.residual_sums[s.sweep] if s.sweep < len(state.residual_sums) else math.nan
        breg = state.bregman[s.sweep] if s.sweep < len(state.bregman) else math.nan
        yield s.sweep, s.i, s.residual, s.mu, s.skipped, r_n, breg


def write_trace_csv(state, path, n_eq: int | None = None) -> None:
    lines = [TRACE_HEADER]
    for n, i, res, mu, skipped, r_n, breg in trace_rows(state, n_eq):
        lines.append(",".join([str(n), str(i), _g(res), _g(mu), str(int(skipped)), _g(r_n),
                               _g(breg)]))
    Path(path).write_text("\n".join(lines) + "\n")


def read_trace_csv(path) -> list[dict]:
    rows = []
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        for line in fh:
            vals = line.strip().split(",")
            row = dict(zip(header, vals))
            rows.append({"sweep": int(row["sweep"]), "i": int(row["i"]),
                         "residual": float(row["residual"]), "mu": float(row["mu"]),
                         "skipped": bool(int(row["skipped"])), "R_n": float(row["R_n"]),
                         "bregman": float(row["bregman"])})
    return rows


def write_report(report, path) -> None:
    """Human-readable summary: stopping index, error, timings and the parameter echo."""
    s = report.spec
    lines = [
        f"preset: {s.preset}",
        f"status: {report.status}",
        f"n_delta: {report.n_delta}",
        f"relative_l2_error: {report.rel_error:.10g}",
        f"achieved_delta: {report.delta:.10g}",
        f"threshold_tau_delta: {s.tau * report.delta:.10g}",
        f"c1: {report.c1:.10g}",
        f"final_residual_sum: {report.final_residual_sum:.10g}",
        f"inexact_prox_steps: {report.inexact_prox}",
        f"wall_time_s: {report.wall_time:.3f}",
        "",
        "# parameters",
        s.echo().rstrip("\n"),
    ]
    Path(path).write_text("\n".join(lines) + "\n")
