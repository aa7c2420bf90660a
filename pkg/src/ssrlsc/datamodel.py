"""Cube, label and sample containers, file I/O, sampling and synthetic data.

Cube files are a header/payload pair. The header is plain text with one
``key: value`` per line::

    height: 145
    width: 145
    bands: 200
    dtype: f32          # f32 | f64 | i16 | u16
    byte_order: little  # little | big
    interleave: bsq     # bsq (band, row, col) | bip (row, col, band)
    data_file: cube.raw # optional, defaults to <header stem>.raw

Labels are a CSV grid of non-negative integers, 0 meaning unlabeled.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

DTYPES = {"f32": "f4", "f64": "f8", "i16": "i2", "u16": "u2"}
BYTE_ORDERS = {"little": "<", "big": ">"}
INTERLEAVES = ("bsq", "bip")


class CubeFormatError(ValueError):
    """Malformed cube header or payload."""


class LabelError(ValueError):
    """Malformed label grid."""


class SplitError(ValueError):
    """A class cannot supply the requested training samples."""


def _frozen(arr):
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class HyperCube:
    """An (height, width, bands) float64 spectral image."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64, order="C", copy=True)
        if vals.ndim != 3 or min(vals.shape) < 1:
            raise CubeFormatError(f"cube must be a non-empty 3-D array, got shape {vals.shape}")
        bad = ~np.isfinite(vals)
        if bad.any():
            idx = tuple(int(i) for i in np.argwhere(bad)[0])
            raise CubeFormatError(f"non-finite value at (row, col, band) = {idx}")
        object.__setattr__(self, "values", _frozen(vals))

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def bands(self) -> int:
        return self.values.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.values.shape

    def pixels(self) -> np.ndarray:
        """All spectra as an (height*width, bands) view, raster order."""
        return self.values.reshape(-1, self.bands)


@dataclass(frozen=True)
class LabelGrid:
    """(height, width) class map, 0 = unlabeled, classes 1..C contiguous."""

    labels: np.ndarray

    def __post_init__(self):
        lab = np.array(self.labels, copy=True)
        if lab.ndim != 2 or min(lab.shape) < 1:
            raise LabelError(f"label grid must be a non-empty 2-D array, got shape {lab.shape}")
        if lab.dtype.kind == "f":
            if not np.all(lab == np.round(lab)):
                raise LabelError("labels must be integers")
        lab = lab.astype(np.int64)
        if (lab < 0).any():
            r, c = np.argwhere(lab < 0)[0]
            raise LabelError(f"negative label {lab[r, c]} at ({r}, {c})")
        present = set(np.unique(lab[lab > 0]).tolist())
        top = max(present, default=0)
        missing = sorted(set(range(1, top + 1)) - present)
        if missing:
            raise LabelError(f"class ids must be contiguous 1..{top}; missing {missing}")
        object.__setattr__(self, "labels", _frozen(lab))

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def n_classes(self) -> int:
        return int(self.labels.max())

    def class_counts(self) -> dict[int, int]:
        return {c: int(np.sum(self.labels == c)) for c in range(1, self.n_classes + 1)}

    def check_aligned(self, cube: HyperCube) -> None:
        if (self.height, self.width) != (cube.height, cube.width):
            raise LabelError(
                f"label grid {self.height}x{self.width} does not match cube "
                f"{cube.height}x{cube.width}"
            )


@dataclass(frozen=True)
class SampleSet:
    """Row-per-sample features with class ids and (row, col) pixel positions."""

    features: np.ndarray
    labels: np.ndarray
    positions: np.ndarray

    def __post_init__(self):
        feats = np.array(self.features, dtype=np.float64, copy=True)
        labels = np.array(self.labels, dtype=np.int64, copy=True).reshape(-1)
        pos = np.array(self.positions, dtype=np.int64, copy=True).reshape(-1, 2)
        if feats.ndim != 2:
            raise ValueError("features must be 2-D (N, D)")
        if not (len(feats) == len(labels) == len(pos)):
            raise ValueError(
                f"length mismatch: {len(feats)} features, {len(labels)} labels, {len(pos)} positions"
            )
        if (labels < 1).any():
            raise ValueError("sample labels must be class ids >= 1")
        object.__setattr__(self, "features", _frozen(feats))
        object.__setattr__(self, "labels", _frozen(labels))
        object.__setattr__(self, "positions", _frozen(pos))

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    @classmethod
    def from_cube(cls, cube: HyperCube, positions, labels) -> "SampleSet":
        pos = np.asarray(positions, dtype=np.int64).reshape(-1, 2)
        if len(pos) and (
            (pos < 0).any() or (pos[:, 0] >= cube.height).any() or (pos[:, 1] >= cube.width).any()
        ):
            raise ValueError("sample position outside the cube")
        return cls(cube.values[pos[:, 0], pos[:, 1], :], labels, pos)

    def with_features(self, features) -> "SampleSet":
        return SampleSet(features, self.labels, self.positions)


@dataclass(frozen=True)
class SplitSpec:
    per_class_train: int = 10
    seed: int = 0
    runs: int = 5

    def __post_init__(self):
        if self.per_class_train < 1:
            raise ValueError("per_class_train must be >= 1")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


def rng_for(seed: int) -> np.random.Generator:
    """Seeded generator used for every random draw in the toolkit.

    Philox-4x64 is counter based, so streams are reproducible across
    platforms for a given numpy bit-generator implementation.
    """
    return np.random.Generator(np.random.Philox(int(seed)))


# --------------------------------------------------------------------------
# cube I/O


def read_header(header_path) -> dict:
    path = Path(header_path)
    if not path.is_file():
        raise CubeFormatError(f"header not found: {path}")
    meta = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise CubeFormatError(f"{path}:{lineno}: expected 'key: value', got {raw!r}")
        key, value = (s.strip() for s in line.split(":", 1))
        meta[key.lower().replace("-", "_").replace(" ", "_")] = value

    try:
        out = {k: int(meta[k]) for k in ("height", "width", "bands")}
    except KeyError as exc:
        raise CubeFormatError(f"{path}: missing header key {exc.args[0]!r}") from None
    except ValueError as exc:
        raise CubeFormatError(f"{path}: {exc}") from None
    if min(out.values()) < 1:
        raise CubeFormatError(f"{path}: dimensions must be >= 1")
    out["dtype"] = meta.get("dtype", "f32").lower()
    out["byte_order"] = meta.get("byte_order", meta.get("order", "little")).lower()
    out["interleave"] = meta.get("interleave", "bsq").lower()
    if out["dtype"] not in DTYPES:
        raise CubeFormatError(f"{path}: unsupported dtype {out['dtype']!r}")
    if out["byte_order"] not in BYTE_ORDERS:
        raise CubeFormatError(f"{path}: unsupported byte_order {out['byte_order']!r}")
    if out["interleave"] not in INTERLEAVES:
        raise CubeFormatError(f"{path}: unsupported interleave {out['interleave']!r}")
    out["data_file"] = path.parent / meta.get("data_file", path.with_suffix(".raw").name)
    return out


def _numpy_dtype(dtype: str, byte_order: str) -> np.dtype:
    return np.dtype(BYTE_ORDERS[byte_order] + DTYPES[dtype])


def load_cube(header_path) -> HyperCube:
    """Read a header/raw pair into a :class:`HyperCube`."""
    hdr = read_header(header_path)
    data_path = Path(hdr["data_file"])
    if not data_path.is_file():
        raise CubeFormatError(f"payload not found: {data_path}")
    dt = _numpy_dtype(hdr["dtype"], hdr["byte_order"])
    h, w, d = hdr["height"], hdr["width"], hdr["bands"]
    expected = h * w * d * dt.itemsize
    actual = os.path.getsize(data_path)
    if actual != expected:
        raise CubeFormatError(
            f"size mismatch: header declares {h}x{w}x{d} {hdr['dtype']} = {expected} bytes, "
            f"payload {data_path.name} has {actual}"
        )
    flat = np.fromfile(data_path, dtype=dt).astype(np.float64)
    if hdr["interleave"] == "bsq":
        values = flat.reshape(d, h, w).transpose(1, 2, 0)
    else:
        values = flat.reshape(h, w, d)
    return HyperCube(values)


def write_cube(cube: HyperCube, header_path, dtype="f64", byte_order="little", interleave="bsq"):
    """Write ``cube`` as ``header_path`` plus a ``.raw`` payload beside it.

    Integer dtypes round to nearest; values outside the type's range raise.
    """
    if dtype not in DTYPES or byte_order not in BYTE_ORDERS or interleave not in INTERLEAVES:
        raise CubeFormatError(f"unsupported layout {dtype}/{byte_order}/{interleave}")
    header_path = Path(header_path)
    data_path = header_path.with_suffix(".raw")
    if data_path == header_path:
        data_path = header_path.with_name(header_path.name + ".raw")
    dt = _numpy_dtype(dtype, byte_order)
    vals = cube.values
    if dt.kind in "iu":
        info = np.iinfo(dt)
        vals = np.rint(vals)
        if vals.min() < info.min or vals.max() > info.max:
            raise CubeFormatError(f"values out of range for {dtype}")
    if interleave == "bsq":
        vals = vals.transpose(2, 0, 1)
    np.ascontiguousarray(vals).astype(dt).tofile(data_path)
    header_path.write_text(
        f"height: {cube.height}\n"
        f"width: {cube.width}\n"
        f"bands: {cube.bands}\n"
        f"dtype: {dtype}\n"
        f"byte_order: {byte_order}\n"
        f"interleave: {interleave}\n"
        f"data_file: {data_path.name}\n"
    )
    return header_path, data_path


# --------------------------------------------------------------------------
# labels


def load_labels(path, height: int, width: int) -> LabelGrid:
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                rows.append([int(cell) for cell in row])
            except ValueError:
                raise LabelError(f"{path}:{lineno}: non-integer label in {row!r}") from None
            if len(rows[-1]) != width:
                raise LabelError(
                    f"{path}:{lineno}: ragged row, expected {width} columns, got {len(rows[-1])}"
                )
    if len(rows) != height:
        raise LabelError(f"{path}: expected {height} rows, got {len(rows)}")
    return LabelGrid(np.array(rows, dtype=np.int64))


def write_labels(grid: LabelGrid, path) -> None:
    with open(path, "w", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows(grid.labels.tolist())


# --------------------------------------------------------------------------
# sampling


def labeled_positions(grid: LabelGrid, cls: int) -> np.ndarray:
    """(row, col) of every pixel of class ``cls`` in raster order."""
    return np.argwhere(grid.labels == cls)


def split_positions(grid: LabelGrid, spec: SplitSpec, run: int):
    """Train/test (positions, labels) for one run; see :func:`split`."""
    k = spec.per_class_train
    counts = grid.class_counts()
    short = [c for c, n in counts.items() if n < k]
    if short:
        detail = ", ".join(f"class {c} has {counts[c]}" for c in short)
        raise SplitError(f"per_class_train={k} exceeds available pixels: {detail}")
    rng = rng_for(spec.seed + run)
    tr_pos, tr_lab, te_pos, te_lab = [], [], [], []
    for c in range(1, grid.n_classes + 1):
        pos = labeled_positions(grid, c)
        perm = rng.permutation(len(pos))
        chosen = np.zeros(len(pos), dtype=bool)
        chosen[perm[:k]] = True
        tr_pos.append(pos[chosen])
        te_pos.append(pos[~chosen])
        tr_lab.append(np.full(k, c))
        te_lab.append(np.full(len(pos) - k, c))
    cat = lambda parts, shape: np.concatenate(parts) if parts else np.zeros(shape, dtype=np.int64)
    return (
        (cat(tr_pos, (0, 2)), cat(tr_lab, (0,))),
        (cat(te_pos, (0, 2)), cat(te_lab, (0,))),
    )


def split(grid: LabelGrid, cube: HyperCube, spec: SplitSpec, run: int = 0):
    """Draw ``spec.per_class_train`` training pixels per class for ``run``.

    The draw uses a generator seeded with ``spec.seed + run``; every other
    labeled pixel goes to the test set. Samples are ordered by class, then
    raster position.
    """
    grid.check_aligned(cube)
    (tr_pos, tr_lab), (te_pos, te_lab) = split_positions(grid, spec, run)
    return SampleSet.from_cube(cube, tr_pos, tr_lab), SampleSet.from_cube(cube, te_pos, te_lab)


def standardize_cube(cube: HyperCube, positions) -> tuple[HyperCube, np.ndarray, np.ndarray]:
    """Per-band zero mean / unit variance using statistics of ``positions`` only.

    Bands with zero spread at those positions are centered but not scaled.
    """
    pos = np.asarray(positions, dtype=np.int64).reshape(-1, 2)
    ref = cube.values[pos[:, 0], pos[:, 1], :]
    mean = ref.mean(axis=0)
    std = ref.std(axis=0)
    std[std == 0] = 1.0
    return HyperCube((cube.values - mean) / std), mean, std


# --------------------------------------------------------------------------
# synthetic fixture


def make_synthetic(
    classes=3,
    blocks_per_class=2,
    block_size=8,
    bands=16,
    class_sep=6.0,
    noise_sd=0.5,
    seed=0,
):
    """Block-structured cube with one constant mean spectrum per class.

    Blocks of ``block_size`` x ``block_size`` pixels are tiled on a grid of
    ``blocks_per_class`` rows by ``classes`` columns and assigned classes in
    a seeded random order. Class means are Gaussian draws rescaled so the
    closest pair sits exactly ``class_sep`` apart.
    """
    if min(classes, blocks_per_class, block_size, bands) < 1:
        raise ValueError("counts must be >= 1")
    if noise_sd < 0:
        raise ValueError("noise_sd must be >= 0")
    if class_sep < 0:
        raise ValueError("class_sep must be >= 0")
    rng = rng_for(seed)

    means = rng.standard_normal((classes, bands))
    if classes > 1:
        means *= class_sep / min_pairwise_distance(means)

    assignment = rng.permutation(np.repeat(np.arange(1, classes + 1), blocks_per_class))
    rows, cols = blocks_per_class, classes
    labels = np.zeros((rows * block_size, cols * block_size), dtype=np.int64)
    for b, c in enumerate(assignment):
        r0, c0 = (b // cols) * block_size, (b % cols) * block_size
        labels[r0 : r0 + block_size, c0 : c0 + block_size] = c

    values = means[labels - 1]
    if noise_sd > 0:
        values = values + noise_sd * rng.standard_normal(values.shape)
    return HyperCube(values), LabelGrid(labels)


def min_pairwise_distance(points: np.ndarray) -> float:
    best = math.inf
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            best = min(best, float(np.linalg.norm(points[i] - points[j])))
    return best
