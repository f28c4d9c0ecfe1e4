"""Portable cube/ground-truth files, band-removal presets and report tables.

The cube container is a single file: an ASCII key-value header terminated
by an ``end-header`` line, followed by the raw payload of little-endian
32-bit floats in band-sequential order (band 0's full image row-major,
then band 1, ...).  The same container stores ground-truth factors: the
endmember matrix as an L-band, 1 x K image and the abundance matrix as a
K-band image on the pixel grid.  Reports are plain CSV tables with one
row per endmember, one column per method and a trailing average row.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CubeFormatError, ShapeError
from .labeling import GroundTruth
from .model import AbundanceMatrix, EndmemberMatrix, HyperCube

_MAGIC = "hsunmix-cube-v1"
_END = "end-header"
_REQUIRED = ("rows", "cols", "bands", "dtype", "byte_order", "interleave")


def parse_kv_text(text):
    """Parse a plain-text key-value document into an ordered dict.

    Lines look like ``key = value``; blank lines and ``#`` comments are
    skipped.  Values stay strings; callers convert.
    """
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise CubeFormatError(f"line {lineno} is not 'key = value': {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def load_kv(path):
    return parse_kv_text(Path(path).read_text(encoding="ascii"))


def dump_kv(mapping, path):
    lines = [f"{k} = {v}" for k, v in mapping.items()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def _write_container(path, data, rows, cols, extra=None):
    """Write a bands x (rows*cols) float matrix in the cube container."""
    data = np.asarray(data, dtype=np.float64)
    bands, n = data.shape
    if rows * cols != n:
        raise ShapeError(f"grid {rows}x{cols} does not match {n} pixels")
    header = [
        _MAGIC,
        f"rows = {rows}",
        f"cols = {cols}",
        f"bands = {bands}",
        "dtype = f32",
        "byte_order = little",
        "interleave = band-sequential",
    ]
    for key, value in (extra or {}).items():
        header.append(f"{key} = {value}")
    header.append(_END)
    payload = np.ascontiguousarray(data, dtype="<f4").tobytes()
    with open(path, "wb") as fh:
        fh.write(("\n".join(header) + "\n").encode("ascii"))
        fh.write(payload)


def _read_container(path):
    blob = Path(path).read_bytes()
    marker = (_END + "\n").encode("ascii")
    split = blob.find(marker)
    if split < 0:
        raise CubeFormatError(f"{path}: missing {_END!r} marker")
    try:
        head_text = blob[:split].decode("ascii")
    except UnicodeDecodeError as err:
        raise CubeFormatError(f"{path}: header is not ASCII") from err
    lines = head_text.splitlines()
    if not lines or lines[0].strip() != _MAGIC:
        raise CubeFormatError(f"{path}: not a {_MAGIC} file")
    header = parse_kv_text("\n".join(lines[1:]))
    for key in _REQUIRED:
        if key not in header:
            raise CubeFormatError(f"{path}: header misses {key!r}")
    if header["dtype"] != "f32":
        raise CubeFormatError(f"{path}: unsupported dtype {header['dtype']!r}")
    if header["byte_order"] != "little":
        raise CubeFormatError(
            f"{path}: unsupported byte order {header['byte_order']!r}"
        )
    if header["interleave"] != "band-sequential":
        raise CubeFormatError(
            f"{path}: unsupported interleave {header['interleave']!r}"
        )
    try:
        rows, cols, bands = (int(header[k]) for k in ("rows", "cols", "bands"))
    except ValueError as err:
        raise CubeFormatError(f"{path}: non-integer grid fields") from err
    payload = blob[split + len(marker):]
    expected = rows * cols * bands * 4
    if len(payload) != expected:
        raise CubeFormatError(
            f"{path}: payload holds {len(payload)} bytes, expected {expected}"
        )
    data = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    return data.reshape(bands, rows * cols), rows, cols, header


def save_cube(cube, path):
    """Write a HyperCube; the payload is stored at 32-bit float precision."""
    extra = {"band_ids": ",".join(str(b) for b in cube.band_ids)}
    if cube.wavelengths is not None:
        extra["wavelengths"] = ",".join(repr(w) for w in cube.wavelengths)
    _write_container(path, cube.data, cube.rows, cube.cols, extra)


def load_cube(path):
    """Read a cube container back into a HyperCube."""
    data, rows, cols, header = _read_container(path)
    band_ids = None
    if "band_ids" in header:
        band_ids = tuple(int(b) for b in header["band_ids"].split(","))
    wavelengths = None
    if "wavelengths" in header:
        wavelengths = tuple(float(w) for w in header["wavelengths"].split(","))
    return HyperCube(
        data,
        rows=rows,
        cols=cols,
        band_ids=band_ids,
        wavelengths=wavelengths,
        allow_negative=True,
    )


@dataclass(frozen=True)
class BandRemovalList:
    """Named list of 1-based inclusive band ranges to drop."""

    name: str
    total_bands: int
    removed_ranges: tuple

    def __post_init__(self):
        ranges = tuple((int(lo), int(hi)) for lo, hi in self.removed_ranges)
        last = 0
        for lo, hi in sorted(ranges):
            if lo < 1 or hi > self.total_bands or lo > hi:
                raise ValueError(
                    f"range {lo}-{hi} outside 1..{self.total_bands}"
                )
            if lo <= last:
                raise ValueError(f"range {lo}-{hi} overlaps a previous range")
            last = hi
        object.__setattr__(self, "removed_ranges", ranges)

    @property
    def kept_count(self):
        removed = sum(hi - lo + 1 for lo, hi in self.removed_ranges)
        return self.total_bands - removed


# Published per-image band selections for the seven source images.  The
# Moffett Field source states only the retained count (196 of 224); its
# ranges here are representative water-vapor/noisy regions matching it.
BAND_REMOVAL_PRESETS = {
    "samson": BandRemovalList("samson", 156, ()),
    "jasper_ridge": BandRemovalList(
        "jasper_ridge", 224, ((1, 3), (108, 112), (154, 166), (220, 224))
    ),
    "urban": BandRemovalList(
        "urban", 210,
        ((1, 4), (76, 76), (87, 87), (101, 111), (136, 153), (198, 210)),
    ),
    "cuprite": BandRemovalList(
        "cuprite", 224, ((1, 2), (104, 113), (148, 167), (221, 224))
    ),
    "moffett_field": BandRemovalList(
        "moffett_field", 224, ((1, 3), (107, 113), (153, 166), (221, 224))
    ),
    "san_diego_airport": BandRemovalList(
        "san_diego_airport", 224,
        ((1, 6), (33, 35), (97, 97), (107, 113), (153, 166), (221, 224)),
    ),
    "washington_dc_mall": BandRemovalList(
        "washington_dc_mall", 210, ((103, 106), (138, 148), (207, 210))
    ),
}


def apply_band_removal(cube, removal):
    """Drop the listed bands; band_ids keeps the surviving original ids."""
    if cube.n_bands != removal.total_bands:
        raise ShapeError(
            f"cube has {cube.n_bands} bands but the {removal.name!r} list "
            f"expects {removal.total_bands}"
        )
    keep = np.ones(removal.total_bands, dtype=bool)
    for lo, hi in removal.removed_ranges:
        keep[lo - 1 : hi] = False
    wavelengths = None
    if cube.wavelengths is not None:
        wavelengths = tuple(np.asarray(cube.wavelengths)[keep])
    return HyperCube(
        cube.data[keep],
        rows=cube.rows,
        cols=cube.cols,
        band_ids=tuple(np.asarray(cube.band_ids)[keep]),
        wavelengths=wavelengths,
        allow_negative=True,
    )


def _gt_paths(prefix):
    prefix = Path(prefix)
    return (
        prefix.with_name(prefix.name + "_endmembers.cube"),
        prefix.with_name(prefix.name + "_abundances.cube"),
    )


def save_ground_truth(gt, prefix, rows=None, cols=None):
    """Write a GroundTruth as two cube containers sharing a path prefix.

    rows/cols give the abundance pixel grid; they default to a 1 x N strip.
    """
    m_path, a_path = _gt_paths(prefix)
    Md, Ad = gt.M.data, gt.A.data
    n = Ad.shape[1]
    if rows is None or cols is None:
        rows, cols = 1, n
    extra_m = {"names": ",".join(gt.M.names)}
    for key, value in gt.provenance.items():
        extra_m[f"prov_{key}"] = str(value)
    _write_container(m_path, Md, 1, Md.shape[1], extra_m)
    _write_container(a_path, Ad, rows, cols, None)
    return m_path, a_path


def load_ground_truth(prefix):
    """Read a GroundTruth pair; warns when columns drift off the simplex."""
    m_path, a_path = _gt_paths(prefix)
    m_data, _mr, mc, m_header = _read_container(m_path)
    a_data, _ar, _ac, _a_header = _read_container(a_path)
    if mc != a_data.shape[0]:
        raise ShapeError(
            f"{m_path} holds {mc} endmembers but {a_path} has "
            f"{a_data.shape[0]} abundance rows"
        )
    names = None
    if "names" in m_header:
        names = tuple(m_header["names"].split(","))
    provenance = {
        key[5:]: value for key, value in m_header.items() if key.startswith("prov_")
    }
    sums = a_data.sum(axis=0)
    worst = float(np.max(np.abs(sums - 1.0))) if sums.size else 0.0
    if worst > 1e-4:
        warnings.warn(
            f"loaded abundances deviate from the simplex by up to {worst:.3g}",
            RuntimeWarning,
        )
        provenance["simplex_deviation"] = f"{worst:.6g}"
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return GroundTruth(
            EndmemberMatrix(m_data, names=names),
            AbundanceMatrix(a_data),
            provenance=provenance,
        )


def load_class_map(path):
    """Read an integer-per-pixel text grid into a one-hot label matrix.

    The file holds one row of whitespace-separated 1-based class ids per
    image row.
    """
    from .labeling import ClassLabelMap

    rows = []
    for line in Path(path).read_text(encoding="ascii").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        rows.append([int(tok) for tok in line.split()])
    if not rows:
        raise CubeFormatError(f"{path}: no labels found")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise CubeFormatError(f"{path}: ragged label grid")
    grid = np.asarray(rows, dtype=int)
    if grid.min() < 1:
        raise CubeFormatError(f"{path}: class ids must be 1-based positive")
    K = int(grid.max())
    flat = grid.ravel()
    Y = np.zeros((K, flat.size))
    Y[flat - 1, np.arange(flat.size)] = 1.0
    return ClassLabelMap(Y)


def write_metric_table(path, endmember_names, method_names, values):
    """Write one metric table: endmember rows, method columns, Avg. row.

    values is a (K, n_methods) array-like; the average row is computed
    here so every table carries it consistently.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.shape != (len(endmember_names), len(method_names)):
        raise ShapeError(
            f"values shape {arr.shape} does not match "
            f"{len(endmember_names)} endmembers x {len(method_names)} methods"
        )
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(["Endmembers", *method_names])
        for k, name in enumerate(endmember_names):
            writer.writerow([name, *(f"{v:.6f}" for v in arr[k])])
        writer.writerow(["Avg.", *(f"{v:.6f}" for v in arr.mean(axis=0))])


def read_metric_table(path):
    """Read a metric table back as (endmember_names, method_names, values)."""
    with open(path, newline="", encoding="ascii") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][0] != "Endmembers":
        raise CubeFormatError(f"{path}: not a metric table")
    method_names = rows[0][1:]
    names, values = [], []
    for row in rows[1:]:
        if row[0] == "Avg.":
            continue
        names.append(row[0])
        values.append([float(v) for v in row[1:]])
    return names, method_names, np.asarray(values)
