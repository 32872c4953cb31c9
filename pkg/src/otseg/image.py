"""Image and label-map containers plus file I/O.

Pixel storage is row-major and channel-interleaved: ``Image.data`` has shape
``(height, width, channels)`` and dtype float64 with every component in
[0, 1].  ``LabelMap.labels`` has shape ``(height, width)``; flat indices into
both arrays therefore agree across all modules.

CIELAB values are rescaled into the unit range for storage with the fixed
affine maps ``L/100``, ``(a + 128)/255`` and ``(b + 128)/255``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from .errors import ColorSpaceError, LabelOverflowError, UnsupportedFormatError

KNOWN_SPACES = ("gray", "rgb", "lab", "custom")

# sRGB (IEC 61966-2-1) to XYZ with D65 white point.
_SRGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
_D65_WHITE = np.array([0.95047, 1.0, 1.08883])
# CIE f(t) breakpoints as exact rationals.
_CIE_EPS = 216.0 / 24389.0
_CIE_KAPPA = 24389.0 / 27.0

# Rec. 709 luma coefficients, applied to the stored (gamma-encoded) values.
_LUMA = np.array([0.2126, 0.7152, 0.0722])


@dataclass(frozen=True)
class Image:
    """Immutable image: (H, W, C) float64 data in [0, 1] plus a space tag."""

    data: np.ndarray
    space: str = "gray"

    def __post_init__(self):
        data = np.ascontiguousarray(self.data, dtype=np.float64)
        if data.ndim == 2:
            data = data[:, :, None]
        if data.ndim != 3 or data.shape[2] < 1:
            raise ValueError("image data must have shape (H, W, C)")
        if self.space not in KNOWN_SPACES:
            raise ValueError(f"unknown color space {self.space!r}")
        if not np.isfinite(data).all():
            raise ValueError("image data contains non-finite values")
        if data.min() < 0.0 or data.max() > 1.0:
            raise ValueError("image data outside [0, 1]")
        object.__setattr__(self, "data", data)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @property
    def pixel_count(self) -> int:
        return self.data.shape[0] * self.data.shape[1]

    def colors(self) -> np.ndarray:
        """Flat (N, C) view of the pixel colors, row-major."""
        return self.data.reshape(-1, self.channels)


@dataclass(frozen=True)
class LabelMap:
    """Per-pixel nonnegative integer region ids, shape (H, W)."""

    labels: np.ndarray

    def __post_init__(self):
        labels = np.ascontiguousarray(self.labels, dtype=np.int32)
        if labels.ndim != 2:
            raise ValueError("labels must have shape (H, W)")
        if labels.min() < 0:
            raise ValueError("labels must be nonnegative")
        object.__setattr__(self, "labels", labels)

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def max_label(self) -> int:
        return int(self.labels.max())

    def num_regions(self) -> int:
        return len(np.unique(self.labels))

    def compacted(self) -> "LabelMap":
        """Relabel so the distinct ids are exactly 0..n-1, preserving order."""
        ids, inverse = np.unique(self.labels, return_inverse=True)
        if ids.size and ids[0] == 0 and ids[-1] == ids.size - 1:
            return self
        return LabelMap(inverse.reshape(self.labels.shape).astype(np.int32))


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------

def _detect_format(head: bytes) -> str:
    if head.startswith(b"\x89PNG\r\n\x1a\n"):
        return "png"
    if head[:2] in (b"P2", b"P3", b"P5", b"P6"):
        return "pnm"
    if head.startswith(b"\xff\xd8"):
        return "jpeg"
    return "unknown"


def _parse_pnm(raw: bytes) -> np.ndarray:
    """Parse P2/P3/P5/P6 with 8- or 16-bit samples into (H, W, C) floats."""
    magic = raw[:2].decode("ascii")
    pos = 2

    def next_token() -> bytes:
        nonlocal pos
        while pos < len(raw):
            if raw[pos : pos + 1].isspace():
                pos += 1
            elif raw[pos : pos + 1] == b"#":
                while pos < len(raw) and raw[pos : pos + 1] != b"\n":
                    pos += 1
            else:
                break
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise UnsupportedFormatError("truncated PNM header")
        return raw[start:pos]

    width = int(next_token())
    height = int(next_token())
    maxval = int(next_token())
    if not 0 < maxval < 65536:
        raise UnsupportedFormatError(f"unsupported PNM maxval {maxval}")
    channels = 3 if magic in ("P3", "P6") else 1
    count = width * height * channels
    if magic in ("P2", "P3"):
        values = np.array([int(next_token()) for _ in range(count)], dtype=np.float64)
    else:
        pos += 1  # single whitespace after maxval
        dtype = ">u2" if maxval > 255 else np.uint8
        itemsize = 2 if maxval > 255 else 1
        body = raw[pos : pos + count * itemsize]
        if len(body) < count * itemsize:
            raise UnsupportedFormatError("truncated PNM pixel data")
        values = np.frombuffer(body, dtype=dtype).astype(np.float64)
    return (values / maxval).reshape(height, width, channels)


def _png_depth_and_color(head: bytes) -> tuple[int, int]:
    # IHDR: width(4) height(4) bitdepth(1) colortype(1) at offset 16
    return head[24], head[25]


def load_image_bytes(raw: bytes, name: str = "<bytes>") -> Image:
    """Decode PNG/PPM/PGM bytes, normalizing samples into [0, 1].

    Single-channel data is tagged ``gray``, three-channel ``rgb``.  JPEG and
    other formats are rejected.
    """
    import io

    fmt = _detect_format(raw[:32])
    if fmt == "pnm":
        data = _parse_pnm(raw)
    elif fmt == "png":
        depth, color_type = _png_depth_and_color(raw[:32])
        if depth == 16 and color_type != 0:
            raise UnsupportedFormatError("16-bit color PNG not supported")
        if depth not in (8, 16):
            raise UnsupportedFormatError(f"unsupported PNG bit depth {depth}")
        with PILImage.open(io.BytesIO(raw)) as im:
            im.load()
            if im.mode in ("I;16", "I"):
                arr = np.asarray(im, dtype=np.float64)
                data = (arr / 65535.0)[:, :, None]
            elif im.mode == "L":
                data = (np.asarray(im, dtype=np.float64) / 255.0)[:, :, None]
            elif im.mode == "RGB":
                data = np.asarray(im, dtype=np.float64) / 255.0
            elif im.mode == "P":
                data = np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0
            else:
                raise UnsupportedFormatError(f"unsupported PNG mode {im.mode}")
    else:
        raise UnsupportedFormatError(f"unsupported format for {name}")
    space = "gray" if data.shape[2] == 1 else "rgb"
    return Image(data, space)


def load_image(path) -> Image:
    """Load a PNG/PPM/PGM file; see :func:`load_image_bytes`."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise UnsupportedFormatError(f"cannot read {path}: {exc}") from exc
    return load_image_bytes(raw, path.name)


def save_image(img: Image, path) -> None:
    """Write an image as 8-bit PNG (grayscale for C=1, RGB for C=3)."""
    arr = np.round(img.data * 255.0).astype(np.uint8)
    if img.channels == 1:
        pil = PILImage.fromarray(arr[:, :, 0], mode="L")
    elif img.channels == 3:
        pil = PILImage.fromarray(arr, mode="RGB")
    else:
        raise UnsupportedFormatError(f"cannot save {img.channels}-channel image as PNG")
    pil.save(path, format="PNG")


# ---------------------------------------------------------------------------
# Color operations
# ---------------------------------------------------------------------------

def rgb_to_lab(img: Image) -> Image:
    """Convert an sRGB image to CIELAB (D65), stored in unit range.

    L is divided by 100 and a, b are mapped by (x + 128)/255; the sRGB gamut
    keeps a, b well inside [-128, 127], so the map is within [0, 1].
    """
    if img.space != "rgb":
        raise ColorSpaceError(f"rgb_to_lab requires an rgb image, got {img.space!r}")
    rgb = img.data
    linear = np.where(rgb > 0.04045, ((rgb + 0.055) / 1.055) ** 2.4, rgb / 12.92)
    xyz = linear @ _SRGB_TO_XYZ.T
    t = xyz / _D65_WHITE
    f = np.where(t > _CIE_EPS, np.cbrt(t), (_CIE_KAPPA * t + 16.0) / 116.0)
    lab_l = 116.0 * f[..., 1] - 16.0
    lab_a = 500.0 * (f[..., 0] - f[..., 1])
    lab_b = 200.0 * (f[..., 1] - f[..., 2])
    scaled = np.stack(
        [lab_l / 100.0, (lab_a + 128.0) / 255.0, (lab_b + 128.0) / 255.0], axis=-1
    )
    return Image(np.clip(scaled, 0.0, 1.0), "lab")


def lab_values(img: Image) -> np.ndarray:
    """Undo the unit-range storage map, returning true (L, a, b) values."""
    if img.space != "lab":
        raise ColorSpaceError("lab_values requires a lab image")
    out = np.empty_like(img.data)
    out[..., 0] = img.data[..., 0] * 100.0
    out[..., 1] = img.data[..., 1] * 255.0 - 128.0
    out[..., 2] = img.data[..., 2] * 255.0 - 128.0
    return out


def rgb_to_gray(img: Image) -> Image:
    """Collapse RGB to single-channel luma (Rec. 709 weights on stored values)."""
    if img.space != "rgb":
        raise ColorSpaceError("rgb_to_gray requires an rgb image")
    # the weights sum to 1 only up to rounding; clip so white stays in range
    return Image(np.clip((img.data @ _LUMA)[:, :, None], 0.0, 1.0), "gray")


def select_channels(img: Image, idx) -> Image:
    """Restrict the image to the listed channels, order preserved."""
    idx = list(idx)
    if len(set(idx)) != len(idx):
        raise ValueError("channel indices must be distinct")
    for i in idx:
        if not 0 <= i < img.channels:
            raise ValueError(f"channel index {i} out of range for C={img.channels}")
    if idx == list(range(img.channels)):
        return img
    space = "gray" if len(idx) == 1 and img.space == "gray" else "custom"
    return Image(img.data[:, :, idx], space)


# ---------------------------------------------------------------------------
# Label map serialization
# ---------------------------------------------------------------------------

LABEL_FORMATS = ("png16", "csv", "rle-json")


def _labels_to_runs(labels: np.ndarray) -> list:
    flat = labels.reshape(-1)
    change = np.flatnonzero(np.diff(flat)) + 1
    starts = np.concatenate([[0], change])
    ends = np.concatenate([change, [flat.size]])
    return [[int(flat[s]), int(e - s)] for s, e in zip(starts, ends)]


def _runs_to_labels(runs, width: int, height: int) -> np.ndarray:
    flat = np.empty(width * height, dtype=np.int32)
    pos = 0
    for label, length in runs:
        flat[pos : pos + length] = label
        pos += length
    if pos != flat.size:
        raise ValueError("run lengths do not cover the label map")
    return flat.reshape(height, width)


def save_labels(lm: LabelMap, path, fmt: str = "png16") -> None:
    """Serialize a label map; ``load_labels`` round-trips exactly."""
    if fmt not in LABEL_FORMATS:
        raise ValueError(f"unknown label format {fmt!r}")
    path = Path(path)
    if fmt == "png16":
        if lm.max_label >= 65536:
            raise LabelOverflowError(f"max label {lm.max_label} exceeds 16-bit PNG")
        PILImage.fromarray(lm.labels.astype(np.uint16)).save(path, format="PNG")
    elif fmt == "csv":
        lines = [",".join(str(v) for v in row) for row in lm.labels]
        path.write_text("\n".join(lines) + "\n")
    else:
        payload = {
            "width": lm.width,
            "height": lm.height,
            "runs": _labels_to_runs(lm.labels),
        }
        path.write_text(json.dumps(payload))


def load_labels(path, fmt: str | None = None) -> LabelMap:
    """Load a label map written by :func:`save_labels`."""
    path = Path(path)
    if fmt is None:
        suffix = path.suffix.lower()
        fmt = {"png": "png16", ".png": "png16", ".csv": "csv", ".json": "rle-json"}.get(
            suffix, "png16"
        )
    if fmt == "png16":
        with PILImage.open(path) as im:
            im.load()
            arr = np.asarray(im)
        return LabelMap(arr.astype(np.int32))
    if fmt == "csv":
        rows = [
            [int(v) for v in line.split(",")]
            for line in path.read_text().strip().splitlines()
        ]
        return LabelMap(np.array(rows, dtype=np.int32))
    if fmt == "rle-json":
        payload = json.loads(path.read_text())
        return LabelMap(
            _runs_to_labels(payload["runs"], payload["width"], payload["height"])
        )
    raise ValueError(f"unknown label format {fmt!r}")


def runs_payload(lm: LabelMap) -> dict:
    """rle-json payload for a label map (HTTP wire format)."""
    return {"width": lm.width, "height": lm.height, "runs": _labels_to_runs(lm.labels)}


def labels_from_runs(payload: dict) -> LabelMap:
    return LabelMap(
        _runs_to_labels(payload["runs"], payload["width"], payload["height"])
    )
