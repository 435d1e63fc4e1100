"""Event CSV ingestion and result serialisation.

Event files are UTF-8, comma-separated, with a header naming ``t`` plus
either ``s`` (temporal) or ``x,y`` (spatial). ``t`` is a positive integer
slice index; slices with no rows become empty patterns. See
``docs/formats.md`` for the full description.
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys
import warnings
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from .acf import Autocorrelogram
from .core import PointPattern, PointPatternSeries, Region
from .errors import InvalidArgumentError, PPACFError

__all__ = [
    "read_events",
    "write_events",
    "write_autocorrelogram",
    "read_autocorrelogram",
]


class DataFormatError(InvalidArgumentError):
    def __init__(self, message, *, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


@contextmanager
def _open(path, mode):
    if path in ("-", None):
        yield sys.stdin if "r" in mode else sys.stdout
        return
    try:
        with open(path, mode, encoding="utf-8", newline="") as fh:
            yield fh
    except OSError as exc:
        raise PPACFError(f"{path}: {exc.strerror or exc}") from exc


def _fmt(x) -> str:
    return format(float(x), ".17g")


def read_events(path, region: Region | None = None) -> PointPatternSeries:
    """Read an event CSV into a series of patterns indexed by ``t = 1..max t``.

    Without ``region`` the unit interval or unit square is used, matching the
    file's dimensionality. Points outside the region are dropped with a
    warning.
    """
    with _open(path, "r") as fh:
        return _parse_events(fh, str(path), region)


def _parse_events(fh, name, region):
    reader = csv.reader(fh)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise DataFormatError("empty file (no header)", path=name, line=1) from None
    cols = {h: i for i, h in enumerate(header)}
    if "t" not in cols:
        raise DataFormatError("header must contain a 't' column", path=name, line=1)
    if "s" in cols and ("x" in cols or "y" in cols):
        raise DataFormatError("header mixes temporal 's' and spatial 'x,y' columns",
                              path=name, line=1)
    if "s" in cols:
        coord_cols = [cols["s"]]
    elif "x" in cols and "y" in cols:
        coord_cols = [cols["x"], cols["y"]]
    else:
        raise DataFormatError("header needs 's' or both 'x' and 'y'", path=name, line=1)
    dim = len(coord_cols)
    if region is None:
        region = Region.interval() if dim == 1 else Region.rectangle()
    elif region.dim != dim:
        raise DataFormatError(f"{dim}-D events do not match a {region.dim}-D region", path=name)

    ts, coords = [], []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not f.strip() for f in row):
            continue
        if len(row) != len(header):
            raise DataFormatError(
                f"expected {len(header)} fields, found {len(row)} (mixed dimensionality?)",
                path=name, line=lineno,
            )
        try:
            t_raw = row[cols["t"]].strip()
            t = int(t_raw)
        except ValueError:
            raise DataFormatError(f"t={row[cols['t']]!r} is not an integer",
                                  path=name, line=lineno) from None
        if t < 1:
            raise DataFormatError(f"t={t} must be >= 1", path=name, line=lineno)
        try:
            xyz = [float(row[c]) for c in coord_cols]
        except ValueError:
            raise DataFormatError("coordinate is not a number", path=name, line=lineno) from None
        if not all(math.isfinite(v) for v in xyz):
            raise DataFormatError("coordinates must be finite", path=name, line=lineno)
        ts.append(t)
        coords.append(xyz)

    if not ts:
        raise DataFormatError("no events: series length n = 0", path=name)
    ts = np.asarray(ts)
    pts = np.asarray(coords, dtype=float)
    if dim == 1:
        pts = pts[:, 0]
    inside = region.contains(pts)
    dropped = int((~inside).sum())
    if dropped:
        warnings.warn(f"{name}: dropped {dropped} event(s) outside the region", stacklevel=3)
    n = int(ts.max())
    ts, pts = ts[inside], pts[inside]
    order = np.argsort(ts, kind="stable")
    ts, pts = ts[order], pts[order]
    bounds = np.searchsorted(ts, np.arange(1, n + 2))
    return PointPatternSeries(tuple(
        PointPattern(pts[bounds[i]:bounds[i + 1]], region) for i in range(n)
    ))


def write_events(series: PointPatternSeries, path) -> None:
    """Write ``series`` as an event CSV (``t,s`` or ``t,x,y``)."""
    with _open(path, "w") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if series.region.dim == 1:
            w.writerow(["t", "s"])
            for t, p in enumerate(series, start=1):
                for s in p.points:
                    w.writerow([t, repr(float(s))])
        else:
            w.writerow(["t", "x", "y"])
            for t, p in enumerate(series, start=1):
                for x, y in p.points:
                    w.writerow([t, repr(float(x)), repr(float(y))])


def _jsonable(v):
    if isinstance(v, np.generic):
        return v.item()
    return v


def autocorrelogram_to_dict(acf: Autocorrelogram) -> dict:
    return {
        "lags": [int(k) for k in acf.lags],
        "rho_hat": [float(v) for v in acf.rho_hat],
        "upper_bounds": None if acf.upper_bounds is None
        else [float(v) for v in acf.upper_bounds],
        "trace_gamma0": float(acf.trace_gamma0),
        "meta": {k: _jsonable(v) for k, v in acf.meta.items()},
    }


def write_autocorrelogram(acf: Autocorrelogram, path, fmt: str | None = None) -> None:
    """Write ``acf`` as CSV (``lag,rho_hat,upper_bound``) or JSON.

    The format defaults to the file extension, and to CSV for stdout.
    """
    fmt = (fmt or (Path(path).suffix.lstrip(".") if path not in ("-", None) else "csv")).lower()
    if fmt not in ("csv", "json"):
        raise InvalidArgumentError(f"unsupported output format {fmt!r}")
    if fmt == "json":
        text = json.dumps(autocorrelogram_to_dict(acf), indent=2, sort_keys=True) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["lag", "rho_hat", "upper_bound"])
        ub = acf.upper_bounds
        for i, k in enumerate(acf.lags):
            w.writerow([int(k), _fmt(acf.rho_hat[i]), "" if ub is None else _fmt(ub[i])])
        text = buf.getvalue()
    with _open(path, "w") as fh:
        fh.write(text)


def read_autocorrelogram(path, fmt: str | None = None) -> Autocorrelogram:
    fmt = (fmt or Path(path).suffix.lstrip(".")).lower()
    with _open(path, "r") as fh:
        text = fh.read()
    if fmt == "json":
        data = json.loads(text)
        ub = data.get("upper_bounds")
        return Autocorrelogram(
            np.array(data["rho_hat"], dtype=float),
            float(data["trace_gamma0"]),
            None if ub is None else np.array(ub, dtype=float),
            dict(data.get("meta", {})),
        )
    rows = list(csv.DictReader(io.StringIO(text)))
    rho = np.array([float(r["rho_hat"]) for r in rows])
    ubs = [r["upper_bound"] for r in rows]
    ub = None if all(u == "" for u in ubs) else np.array([float(u) for u in ubs])
    return Autocorrelogram(rho, float("nan"), ub, {"K": len(rows)})
