"""File formats: Gaussian JSON specs, numeric CSV, canonical JSON reports."""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import DimensionMismatch, NotPSD, ParseError
from .gaussian import GaussianDistribution

SCHEMA = "procwass/1"
SYMMETRY_TOL = 1e-9

__all__ = [
    "SCHEMA",
    "GaussianSpec",
    "RunManifest",
    "read_gaussian_spec",
    "read_points_csv",
    "write_points_csv",
    "write_plan_csv",
    "to_jsonable",
    "dumps_canonical",
    "file_digest",
]


@dataclass(frozen=True)
class GaussianSpec:
    mean: list
    cov: list

    def to_distribution(self) -> GaussianDistribution:
        return GaussianDistribution(np.asarray(self.mean, float), np.asarray(self.cov, float))


@dataclass
class RunManifest:
    """Provenance embedded in every report. Contains no timestamps."""

    command: str
    params: dict
    seed: int
    inputs: list = field(default_factory=list)
    version: str = __version__

    def to_dict(self) -> dict:
        return to_jsonable(asdict(self))

    @classmethod
    def from_dict(cls, d: dict) -> "RunManifest":
        return cls(
            command=d["command"],
            params=dict(d["params"]),
            seed=int(d["seed"]),
            inputs=list(d.get("inputs", [])),
            version=d.get("version", __version__),
        )


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def parse_gaussian_spec(doc, path=None) -> GaussianSpec:
    if not isinstance(doc, dict) or "cov" not in doc:
        raise ParseError('expected a JSON object with a "cov" field', path)
    cov = doc["cov"]
    if not isinstance(cov, list) or not cov or not all(isinstance(r, list) for r in cov):
        raise ParseError('"cov" must be a non-empty list of rows', path)
    d = len(cov)
    for k, row in enumerate(cov):
        if len(row) != d:
            raise ParseError(f'"cov" must be square; row {k} has {len(row)} entries, expected {d}', path)
        if not all(_is_number(x) for x in row):
            raise ParseError(f'"cov" row {k} has non-numeric entries', path)
    C = np.asarray(cov, dtype=float)
    if not np.all(np.isfinite(C)):
        raise ParseError('"cov" has non-finite entries', path)
    asym = float(np.max(np.abs(C - C.T)))
    if asym > SYMMETRY_TOL * max(1.0, float(np.max(np.abs(C)))):
        raise ParseError(f'"cov" is not symmetric (max asymmetry {asym:.3g})', path)
    mean = doc.get("mean", [0.0] * d)
    if not isinstance(mean, list) or not all(_is_number(x) for x in mean):
        raise ParseError('"mean" must be a list of numbers', path)
    if len(mean) != d:
        raise DimensionMismatch(f"{path}: mean has length {len(mean)} but cov is {d}x{d}")
    return GaussianSpec([float(x) for x in mean], (0.5 * (C + C.T)).tolist())


def read_gaussian_spec(path) -> GaussianSpec:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read file ({exc.strerror})", path) from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", path, exc.lineno) from exc
    return parse_gaussian_spec(doc, path)


def load_gaussian(path) -> GaussianDistribution:
    spec = read_gaussian_spec(path)
    try:
        return spec.to_distribution()
    except NotPSD as exc:
        raise NotPSD(f"{path}: {exc}") from exc


def read_points_csv(path, weights_col: int | None = None):
    """Read one sample per row. Returns ``(points, weights or None)``.

    Blank lines and lines starting with ``#`` are skipped; a first row that
    does not parse as numbers is taken as a header.
    """
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise ParseError(f"cannot read file ({exc.strerror})", path) from exc
    rows = []
    width = None
    header_allowed = True
    with fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row) or row[0].lstrip().startswith("#"):
                continue
            try:
                values = [float(c) for c in row]
            except ValueError:
                if header_allowed:
                    header_allowed = False
                    continue
                raise ParseError("non-numeric value", path, lineno) from None
            header_allowed = False
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise ParseError(f"expected {width} columns, found {len(values)}", path, lineno)
            if not all(np.isfinite(values)):
                raise ParseError("non-finite value", path, lineno)
            rows.append(values)
    if not rows:
        raise ParseError("no numeric rows", path)
    data = np.asarray(rows, dtype=float)
    if weights_col is None:
        return data, None
    if not -data.shape[1] <= weights_col < data.shape[1] or data.shape[1] < 2:
        raise ParseError(f"weights column {weights_col} out of range for {data.shape[1]} columns", path)
    w = data[:, weights_col]
    pts = np.delete(data, weights_col % data.shape[1], axis=1)
    return pts, w


def _fmt(x: float) -> str:
    return repr(float(x))


def write_points_csv(points, target, comment: str | None = None) -> None:
    """Write rows of ``points`` with lossless float formatting."""
    buf = io.StringIO()
    if comment:
        for line in comment.splitlines():
            buf.write(f"# {line}\n")
    for row in np.atleast_2d(points):
        buf.write(",".join(_fmt(x) for x in row) + "\n")
    _emit(buf.getvalue(), target)


def write_plan_csv(coupling, target) -> None:
    """Sparse ``i,j,mass`` triplets for the positive entries of a coupling."""
    buf = io.StringIO()
    buf.write("i,j,mass\n")
    ii, jj = np.nonzero(coupling > 0)
    for i, j in zip(ii, jj):
        buf.write(f"{i},{j},{_fmt(coupling[i, j])}\n")
    _emit(buf.getvalue(), target)


def _emit(text: str, target) -> None:
    if hasattr(target, "write"):
        target.write(text)
    else:
        Path(target).write_text(text)


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if hasattr(obj, "__array__"):
        return to_jsonable(np.asarray(obj))
    return obj


def dumps_canonical(doc) -> str:
    """Sorted keys, two-space indent, shortest round-trip float repr."""
    return json.dumps(to_jsonable(doc), sort_keys=True, indent=2, allow_nan=False) + "\n"
