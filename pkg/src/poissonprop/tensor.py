"""Dense tensor containers and elementary pooling/similarity kernels.

All containers hold float64 data internally; 32-bit file inputs are
widened at load time so long iterative runs do not accumulate
single-precision drift.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import LengthMismatch, UpsampleRequested, WindowTooLarge

ZERO_NORM_EPS = 1e-12


def _as_float64(values, name: str) -> np.ndarray:
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    return arr


@dataclass(frozen=True)
class Tensor:
    """N-dimensional row-major array of finite float64 values."""

    data: np.ndarray

    def __post_init__(self):
        arr = _as_float64(self.data, "tensor data")
        if any(d <= 0 for d in arr.shape):
            raise ValueError(f"tensor dims must be positive, got {arr.shape}")
        object.__setattr__(self, "data", arr)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.data.shape


@dataclass(frozen=True)
class FeatureMap:
    """A C x H x W grid of feature vectors."""

    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = _as_float64(self.data, "feature map")
        if arr.ndim != 3:
            raise ValueError(f"feature map must be rank 3 (C,H,W), got rank {arr.ndim}")
        object.__setattr__(self, "data", arr)

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    def pixel_vectors(self) -> np.ndarray:
        """All pixel feature vectors, row-major, as an (H*W, C) array."""
        c, h, w = self.data.shape
        return self.data.reshape(c, h * w).T.copy()


@dataclass(frozen=True)
class SoftMask:
    """An H x W grid of weights in [0, 1]."""

    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = _as_float64(self.data, "mask")
        if arr.ndim != 2:
            raise ValueError(f"mask must be rank 2 (H,W), got rank {arr.ndim}")
        if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
            raise ValueError("mask values must lie in [0, 1]")
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


def avg_pool(
    fmap: FeatureMap,
    window: tuple[int, int],
    stride: tuple[int, int] | None = None,
) -> FeatureMap:
    """Channel-wise average pooling.

    The stride defaults to the window (non-overlapping tiling). Windows
    must tile the spatial extent exactly; partial windows are rejected.
    """
    wh, ww = window
    if stride is None:
        stride = window
    sh, sw = stride
    c, h, w = fmap.data.shape
    if wh < 1 or ww < 1 or sh < 1 or sw < 1:
        raise ValueError("window and stride must be positive")
    if wh > h or ww > w:
        raise WindowTooLarge(f"window {window} exceeds spatial extent {(h, w)}")
    if (h - wh) % sh or (w - ww) % sw:
        raise ValueError(
            f"window {window} with stride {stride} does not tile extent {(h, w)}"
        )
    oh = (h - wh) // sh + 1
    ow = (w - ww) // sw + 1
    out = np.empty((c, oh, ow), dtype=np.float64)
    for i in range(oh):
        for j in range(ow):
            block = fmap.data[:, i * sh : i * sh + wh, j * sw : j * sw + ww]
            out[:, i, j] = block.mean(axis=(1, 2))
    return FeatureMap(out)


def cosine_similarity(u, v) -> float:
    """Cosine of the angle between two vectors, in [-1, 1].

    Returns 0 when either norm falls below 1e-12; near-zero feature
    vectors must not poison downstream sums.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape or u.ndim != 1:
        raise LengthMismatch(f"vector lengths differ: {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu < ZERO_NORM_EPS or nv < ZERO_NORM_EPS:
        return 0.0
    return float(np.clip(float(u @ v) / (nu * nv), -1.0, 1.0))


def _overlap_weights(src: int, dst: int) -> np.ndarray:
    """(dst, src) matrix of fractional cell overlaps; rows sum to 1."""
    scale = src / dst
    weights = np.zeros((dst, src), dtype=np.float64)
    for i in range(dst):
        lo = i * scale
        hi = (i + 1) * scale
        first = int(np.floor(lo))
        last = int(np.ceil(hi))
        for s in range(first, min(last, src)):
            cover = min(hi, s + 1) - max(lo, s)
            if cover > 0:
                weights[i, s] = cover / scale
    return weights


def downsample_mask(mask: SoftMask, target: tuple[int, int]) -> SoftMask:
    """Area-average downsampling: each output cell is the mean of its
    source footprint, with fractional weights at footprint edges."""
    th, tw = target
    h, w = mask.data.shape
    if th < 1 or tw < 1:
        raise ValueError("target dims must be positive")
    if th > h or tw > w:
        raise UpsampleRequested(f"target {target} exceeds source {(h, w)}")
    if (th, tw) == (h, w):
        return SoftMask(mask.data.copy())
    rows = _overlap_weights(h, th)
    cols = _overlap_weights(w, tw)
    out = rows @ mask.data @ cols.T
    # convex combination of [0,1] values; clip float residue only
    return SoftMask(np.clip(out, 0.0, 1.0))
