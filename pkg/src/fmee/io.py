"""Dataset CSV and JSON configuration files.

Dataset CSV: a header ``x_1,..,x_d,y_1,..,y_p`` followed by one row per
observation, floats written with 17 significant digits so that a write/read
round trip is exact.
"""

from __future__ import annotations

import csv
import json
import re
from pathlib import Path

import numpy as np

from .covariate import Kernel, Metric
from .errors import ParseError
from .models import ConditionalModel, MarginalFamily
from .optimize import Box, OptimizerOptions
from .pipeline import EstimationConfig
from .sample import Sample

__all__ = ["format_float", "write_dataset", "parse_dataset", "model_from_dict",
           "model_to_dict", "estimation_config_from_dict", "load_json"]

_HEADER = re.compile(r"^(x|y)_(\d+)$")


def format_float(v: float) -> str:
    """Shortest text that reads back to the same double."""
    return repr(float(v))


def write_dataset(sample: Sample, path) -> None:
    header = [f"x_{j + 1}" for j in range(sample.d)]
    header += [f"y_{t + 1}" for t in range(sample.p)]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(header)
        for xi, yi in zip(sample.x, sample.y):
            out.writerow([format_float(v) for v in xi] + [format_float(v) for v in yi])


def _parse_header(cells: list[str]) -> tuple[int, int]:
    if not cells or cells == [""]:
        raise ParseError("missing header row", line=1)
    d = p = 0
    for col, name in enumerate(cells, start=1):
        m = _HEADER.match(name.strip())
        expect_x = p == 0
        if m is None:
            raise ParseError(f"bad header cell {name!r}", line=1, column=col)
        kind, idx = m.group(1), int(m.group(2))
        if kind == "x" and expect_x and idx == d + 1:
            d += 1
        elif kind == "y" and idx == p + 1:
            p += 1
        else:
            raise ParseError(
                f"header cell {name!r} out of order (want x_1..x_d then y_1..y_p)",
                line=1, column=col)
    if d == 0 or p == 0:
        raise ParseError("header needs at least one x_ and one y_ column", line=1)
    return d, p


def parse_dataset(path) -> Sample:
    """Read a dataset CSV; errors name the offending line and column."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path} is not UTF-8: {exc}") from None
    rows = list(csv.reader(text.splitlines()))
    if not rows:
        raise ParseError("missing header row", line=1)
    d, p = _parse_header(rows[0])
    width = d + p
    data = []
    for line, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != width:
            raise ParseError(f"expected {width} cells, found {len(row)}",
                             line=line, column=min(len(row), width) + 1)
        vals = []
        for col, cell in enumerate(row, start=1):
            try:
                vals.append(float(cell))
            except ValueError:
                raise ParseError(f"non-numeric cell {cell!r}", line=line,
                                 column=col) from None
        data.append(vals)
    if not data:
        raise ParseError("no data rows", line=2)
    arr = np.array(data)
    return Sample(arr[:, :d], arr[:, d:])


def load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, column=exc.colno) from None


def model_from_dict(spec: dict) -> ConditionalModel:
    """Build a model from plain JSON data.

    ``margins`` is a list of keyword dictionaries for :class:`MarginalFamily`;
    the remaining keys are :class:`ConditionalModel` fields.
    """
    spec = dict(spec)
    try:
        margins = tuple(MarginalFamily(**m) for m in spec.pop("margins"))
    except KeyError:
        raise ParseError("model needs a 'margins' list") from None
    except TypeError as exc:
        raise ParseError(f"bad margin specification: {exc}") from None
    if "gamma_clip" in spec and spec["gamma_clip"] is not None:
        spec["gamma_clip"] = tuple(spec["gamma_clip"])
    try:
        return ConditionalModel(margins=margins, **spec)
    except TypeError as exc:
        raise ParseError(f"bad model specification: {exc}") from None


def model_to_dict(model: ConditionalModel) -> dict:
    from dataclasses import asdict

    out = asdict(model)
    out["margins"] = [{k: v for k, v in asdict(m).items() if v is not None}
                      for m in model.margins]
    return out


def estimation_config_from_dict(spec: dict, d: int | None = None) -> EstimationConfig:
    """Keys: alpha, h, kernel, metric, J, kn, alpha_n, bounds [lo, hi],
    lambda_points, mu, grad_tol, max_iter, memory."""
    spec = dict(spec)
    kw = {}
    for key in ("alpha", "h", "J", "kn", "alpha_n", "lambda_points", "mu"):
        if key in spec:
            kw[key] = spec.pop(key)
    if "kernel" in spec:
        kw["kernel"] = Kernel(spec.pop("kernel"))
    if "metric" in spec:
        kw["metric"] = Metric(spec.pop("metric"))
    bounds = spec.pop("bounds", None)
    if bounds is not None:
        if d is None:
            raise ParseError("bounds need the response dimension")
        kw["box"] = Box.uniform(d, float(bounds[0]), float(bounds[1]))
    opt = {k: spec.pop(k) for k in ("grad_tol", "max_iter", "memory", "restarts")
           if k in spec}
    if opt:
        kw["optimizer"] = OptimizerOptions(**opt)
    if spec:
        raise ParseError(f"unknown estimation keys {sorted(spec)}")
    if "alpha" not in kw:
        raise ParseError("estimation config needs 'alpha'")
    return EstimationConfig(**kw)
