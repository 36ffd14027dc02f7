"""Reading, writing, and resampling of waves and matrices in portable text formats.

Wave files: optional ``# fs=<float>`` header line, then either one float per
line or ``time,value`` CSV rows on a uniform time grid.  Matrix files: plain
CSV, one row per line.  All floats use the ``.`` decimal separator and are
written with 17 significant digits so that read/write round-trips are exact
well below the 1e-9 contract.
"""

from __future__ import annotations

import contextlib
from pathlib import Path

import numpy as np

from .core import FormatError, Wave

_FMT = "%.17g"

# relative jitter above this on a two-column time grid is rejected rather
# than silently regridded: resampling label waves here could corrupt phase
_TIME_JITTER_TOL = 1e-3


@contextlib.contextmanager
def _open_text(source, mode: str):
    if hasattr(source, "read") or hasattr(source, "write"):
        yield source
    else:
        with open(Path(source), mode) as handle:
            yield handle


def _parse_float(token: str, lineno: int):
    try:
        return float(token)
    except ValueError:
        raise FormatError(f"line {lineno}: non-numeric value {token.strip()!r}") from None


def read_wave(source, fs_override: float | None = None) -> Wave:
    """Parse a wave file or stream; fs_override wins over any header/inferred rate."""
    header_fs = None
    values = []
    times = []
    ncols = None
    with _open_text(source, "r") as handle:
        for lineno, line in enumerate(handle, start=1):
            text = line.strip()
            if not text:
                continue
            if text.startswith("#"):
                body = text.lstrip("#").strip()
                if body.startswith("fs="):
                    header_fs = _parse_float(body[3:], lineno)
                continue
            tokens = text.split(",")
            if ncols is None:
                ncols = len(tokens)
                if ncols not in (1, 2):
                    raise FormatError(f"line {lineno}: expected 1 or 2 columns, got {ncols}")
            elif len(tokens) != ncols:
                raise FormatError(f"line {lineno}: expected {ncols} columns, got {len(tokens)}")
            if ncols == 1:
                values.append(_parse_float(tokens[0], lineno))
            else:
                times.append(_parse_float(tokens[0], lineno))
                values.append(_parse_float(tokens[1], lineno))
    if not values:
        raise FormatError("empty input: no samples found")

    if ncols == 2:
        dt = np.diff(np.asarray(times, dtype=float))
        if len(dt) == 0:
            raise FormatError("two-column input needs at least 2 rows to infer fs")
        if np.any(dt <= 0):
            raise FormatError("time column must be strictly increasing")
        step = float(np.median(dt))
        if np.max(np.abs(dt - step)) / step > _TIME_JITTER_TOL:
            raise FormatError("non-uniform time grid (relative jitter > 1e-3)")
        fs = 1.0 / step
    else:
        fs = header_fs

    if fs_override is not None:
        fs = fs_override
    if fs is None:
        raise FormatError("sampling rate unknown: add a '# fs=' header or pass fs_override")
    return Wave(np.asarray(values, dtype=float), fs)


def write_wave(w: Wave, sink) -> None:
    """Write one sample per line with a '# fs=' header; round-trips to 1e-9."""
    with _open_text(sink, "w") as handle:
        handle.write(f"# fs={_FMT % w.fs}\n")
        for v in w.samples:
            handle.write(f"{_FMT % v}\n")


def read_matrix(source, require_square: bool = False) -> np.ndarray:
    """Parse a CSV matrix; rejects ragged rows, non-numeric and non-finite values."""
    rows = []
    ncols = None
    with _open_text(source, "r") as handle:
        for lineno, line in enumerate(handle, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            tokens = text.split(",")
            if ncols is None:
                ncols = len(tokens)
            elif len(tokens) != ncols:
                raise FormatError(f"line {lineno}: ragged row ({len(tokens)} vs {ncols} columns)")
            rows.append([_parse_float(t, lineno) for t in tokens])
    if not rows:
        raise FormatError("empty input: no matrix rows found")
    m = np.asarray(rows, dtype=float)
    if not np.all(np.isfinite(m)):
        raise FormatError("matrix contains non-finite values")
    if require_square and m.shape[0] != m.shape[1]:
        raise FormatError(f"expected a square matrix, got {m.shape[0]}x{m.shape[1]}")
    return m


def write_matrix(m, sink) -> None:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise ValueError("write_matrix expects a 2-D array")
    with _open_text(sink, "w") as handle:
        for row in m:
            handle.write(",".join(_FMT % v for v in row) + "\n")


def write_pgm(m, sink) -> None:
    """Render a matrix of values in [-1, 1] as a plain-text (P2) PGM heatmap."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise ValueError("write_pgm expects a 2-D array")
    levels = np.clip(np.rint((m + 1.0) * 0.5 * 255.0), 0, 255).astype(int)
    with _open_text(sink, "w") as handle:
        handle.write("P2\n")
        handle.write(f"{m.shape[1]} {m.shape[0]}\n255\n")
        for row in levels:
            handle.write(" ".join(str(v) for v in row) + "\n")


def resample(w: Wave, factor: float) -> Wave:
    """Linear-interpolation resampling; output fs = factor * w.fs.

    Duration is preserved within one sample period.  Factor is limited to
    [0.25, 4]; frequency content in the 0.7-4 Hz working band survives
    linear interpolation comfortably within that range.
    """
    if not 0.25 <= factor <= 4.0:
        raise ValueError("resample factor must lie in [0.25, 4]")
    if len(w) < 4:
        raise ValueError("resample needs at least 4 samples")
    if factor == 1.0:
        return Wave(w.samples.copy(), w.fs)
    n = len(w)
    n_new = int(round((n - 1) * factor)) + 1
    t_old = np.arange(n) / w.fs
    t_new = np.arange(n_new) / (factor * w.fs)
    return Wave(np.interp(t_new, t_old, w.samples), factor * w.fs)
