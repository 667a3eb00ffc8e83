"""Patch-based image pipeline and grayscale image file I/O.

An image is cut into non-overlapping patches; each patch is vectorized
row-major and becomes one column of the working matrix, with patches
traversed row-major as well. Natural images make that matrix
approximately low rank, which is what the completion solvers exploit.

File formats: Netpbm PGM (P2 ASCII and P5 binary, maxval up to 65535)
and headerless CSV.
"""

import time
from dataclasses import dataclass

import numpy as np

from .core import FeasibleRegion, as_matrix, mse_per_entry
from .errors import (
    CorruptFile,
    IndivisibleLayout,
    IoFailure,
    ShapeMismatch,
    UnsupportedFormat,
)
from .solvers import solve_pmlsv
from .synth import sample_mask, sample_poisson

PGM_MAXVAL_LIMIT = 65535


@dataclass(frozen=True)
class PatchLayout:
    """Non-overlapping tiling of an image; patch sizes must divide."""

    image_h: int
    image_w: int
    patch_h: int
    patch_w: int

    def __post_init__(self):
        if min(self.image_h, self.image_w, self.patch_h, self.patch_w) < 1:
            raise IndivisibleLayout("all layout dimensions must be >= 1")
        if self.image_h % self.patch_h or self.image_w % self.patch_w:
            raise IndivisibleLayout(
                f"{self.patch_h}x{self.patch_w} patches do not tile a "
                f"{self.image_h}x{self.image_w} image"
            )

    @property
    def grid_h(self):
        return self.image_h // self.patch_h

    @property
    def grid_w(self):
        return self.image_w // self.patch_w

    @property
    def matrix_shape(self):
        return (self.patch_h * self.patch_w, self.grid_h * self.grid_w)


def patchify(image, layout):
    """Stack vectorized patches as columns; shape ``layout.matrix_shape``."""
    img = as_matrix(image, shape=(layout.image_h, layout.image_w))
    blocks = img.reshape(
        layout.grid_h, layout.patch_h, layout.grid_w, layout.patch_w
    ).transpose(0, 2, 1, 3)
    return blocks.reshape(layout.grid_h * layout.grid_w, -1).T


def unpatchify(m, layout):
    """Exact inverse of :func:`patchify`."""
    m = as_matrix(m, shape=layout.matrix_shape)
    blocks = m.T.reshape(
        layout.grid_h, layout.grid_w, layout.patch_h, layout.patch_w
    ).transpose(0, 2, 1, 3)
    return blocks.reshape(layout.image_h, layout.image_w)


def mask_overlay(image, mask, layout):
    """Zero out the pixels whose matrix cells are unobserved."""
    m = patchify(image, layout)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != m.shape:
        raise ShapeMismatch(
            f"mask {mask.shape} does not match patch matrix {m.shape}"
        )
    return unpatchify(np.where(mask, m, 0.0), layout)


# --- PGM / CSV files ----------------------------------------------------------


def _pgm_tokens(data):
    """Yield whitespace-separated header tokens, skipping # comments."""
    i = 0
    n = len(data)
    while True:
        while i < n and data[i : i + 1].isspace():
            i += 1
        if i < n and data[i : i + 1] == b"#":
            while i < n and data[i : i + 1] != b"\n":
                i += 1
            continue
        if i >= n:
            return
        start = i
        while i < n and not data[i : i + 1].isspace():
            i += 1
        yield data[start:i], i


def _parse_pgm(data):
    tokens = _pgm_tokens(data)
    try:
        magic, _ = next(tokens)
    except StopIteration:
        raise CorruptFile("empty file") from None
    if magic not in (b"P2", b"P5"):
        raise UnsupportedFormat(f"unsupported magic {magic!r}")
    try:
        width, _ = next(tokens)
        height, _ = next(tokens)
        maxval, end = next(tokens)
        width, height, maxval = int(width), int(height), int(maxval)
    except (StopIteration, ValueError):
        raise CorruptFile("bad PGM header") from None
    if width < 1 or height < 1 or not 0 < maxval <= PGM_MAXVAL_LIMIT:
        raise CorruptFile(
            f"bad PGM dimensions {width}x{height} maxval {maxval}"
        )
    count = width * height
    if magic == b"P2":
        vals = []
        for tok, _ in tokens:
            try:
                vals.append(int(tok))
            except ValueError:
                raise CorruptFile(f"non-integer sample {tok!r}") from None
        if len(vals) < count:
            raise CorruptFile(f"expected {count} samples, got {len(vals)}")
        grid = np.array(vals[:count], dtype=np.int64)
    else:
        raster = data[end + 1 :]  # single whitespace byte after maxval
        if maxval < 256:
            if len(raster) < count:
                raise CorruptFile("truncated binary raster")
            grid = np.frombuffer(raster[:count], dtype=np.uint8).astype(np.int64)
        else:
            if len(raster) < 2 * count:
                raise CorruptFile("truncated binary raster")
            grid = (
                np.frombuffer(raster[: 2 * count], dtype=">u2").astype(np.int64)
            )
    if grid.max(initial=0) > maxval:
        raise CorruptFile("sample exceeds declared maxval")
    return grid.reshape(height, width)


def read_image(path):
    """Read a PGM (by magic) or CSV (by extension) grayscale grid."""
    path = str(path)
    if path.lower().endswith(".csv"):
        from .fileio import read_matrix_csv

        return read_matrix_csv(path)
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    return _parse_pgm(data)


def write_image(grid, path, maxval=None, binary=False):
    """Write an integer-valued grid as PGM (or CSV by extension).

    ``maxval`` defaults to 255 when the data allows, else 65535. A
    written file reads back identically for in-range integer grids.
    """
    path = str(path)
    grid = np.asarray(grid)
    if path.lower().endswith(".csv"):
        from .fileio import write_matrix_csv

        write_matrix_csv(grid, path)
        return
    if grid.ndim != 2:
        raise ShapeMismatch(f"expected a 2-D grid, got ndim={grid.ndim}")
    if np.any(grid != np.floor(grid)) or grid.min(initial=0) < 0:
        raise ValueError("PGM grids must hold nonnegative integers")
    g = grid.astype(np.int64)
    peak = int(g.max(initial=0))
    if maxval is None:
        maxval = 255 if peak <= 255 else PGM_MAXVAL_LIMIT
    if not 0 < maxval <= PGM_MAXVAL_LIMIT or peak > maxval:
        raise ValueError(f"maxval {maxval} cannot represent peak {peak}")
    h, w = g.shape
    try:
        with open(path, "wb") as fh:
            if binary:
                fh.write(f"P5\n{w} {h}\n{maxval}\n".encode())
                dtype = np.uint8 if maxval < 256 else ">u2"
                fh.write(g.astype(dtype).tobytes())
            else:
                fh.write(f"P2\n{w} {h}\n{maxval}\n".encode())
                body = "\n".join(" ".join(str(v) for v in row) for row in g)
                fh.write(body.encode() + b"\n")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def to_display(values, region, maxval=255):
    """Map intensities linearly from [beta, alpha] to 0..maxval.

    Rounds half-up; out-of-range intensities are clipped first. A
    degenerate region (alpha == beta) maps to mid-gray.
    """
    v = np.clip(np.asarray(values, dtype=float), region.beta, region.alpha)
    span = region.alpha - region.beta
    if span == 0.0:
        return np.full(v.shape, maxval // 2, dtype=np.int64)
    scaled = (v - region.beta) / span * maxval
    return np.clip(np.floor(scaled + 0.5), 0, maxval).astype(np.int64)


# --- end-to-end recovery of a partially observed image -------------------------


@dataclass(frozen=True)
class ImageRecovery:
    layout: PatchLayout
    region: FeasibleRegion
    truth: np.ndarray
    mask: np.ndarray
    observations: object
    estimate: np.ndarray
    mse: float
    baseline_mse: float
    report: object
    wall_time: float


def recover_image(image, p, cfg, seed=0, patch=8, scale=1.0, alpha=None, beta=1.0):
    """Run the image-recovery pipeline on a grayscale grid.

    Pixels are scaled, lifted to at least ``beta`` (rates must be
    positive), and clamped at ``alpha`` (default: the scaled maximum).
    The patch matrix is masked with expected fraction ``p``, Poisson
    counts are drawn, and the shrinkage solver recovers the matrix.
    ``baseline_mse`` scores the constant box-midpoint guess.
    """
    img = as_matrix(image)
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must be in (0, 1], got {p}")
    layout = PatchLayout(img.shape[0], img.shape[1], patch, patch)
    intensities = np.maximum(img * scale, beta)
    if alpha is None:
        alpha = float(intensities.max())
    intensities = np.minimum(intensities, alpha)
    d1, d2 = layout.matrix_shape
    region = FeasibleRegion(d1=d1, d2=d2, alpha=alpha, beta=beta, r=min(d1, d2))
    truth = patchify(intensities, layout)

    t0 = time.perf_counter()
    mask = sample_mask(d1, d2, p * d1 * d2, seed)
    obs = sample_poisson(truth, mask, seed, m_expected=p * d1 * d2)
    report = solve_pmlsv(obs, region, cfg)
    wall = time.perf_counter() - t0

    baseline = np.full(truth.shape, (alpha + beta) / 2.0)
    return ImageRecovery(
        layout=layout,
        region=region,
        truth=truth,
        mask=mask,
        observations=obs,
        estimate=report.estimate,
        mse=mse_per_entry(truth, report.estimate),
        baseline_mse=mse_per_entry(truth, baseline),
        report=report,
        wall_time=wall,
    )
