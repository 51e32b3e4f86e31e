"""Decoding images and label masks, sample extraction, segmentation output.

Supported inputs: 8/16-bit PNG, 8/16-bit integer TIFF, 32-bit float TIFF.
Float images are quantized to uniform bins before a value domain is formed.
Label masks are PNGs whose pixel values are literal class ids, 0 meaning
unlabeled. Segmentations are written the same way, so a mask can be painted,
diffed, and re-read with any ordinary image tool.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .domain import ClassSamples, ClassifierLUT, DiscreteDistribution, ValueDomain
from .errors import (
    AmbiguousChannelsError,
    DimensionMismatchError,
    DomainMismatchError,
    EmptyClassInMaskError,
    InputError,
    UnsupportedFormatError,
)
from .metrics import build_distribution

DEPTH_U8 = "u8"
DEPTH_U16 = "u16"
DEPTH_F32Q = "f32-quantized"

# Paintable, mutually distinguishable class colors; class k uses entry k-1
# (cycled). Class 0 renders transparent in colorized output.
DEFAULT_PALETTE: tuple[tuple[int, int, int], ...] = (
    (230, 25, 75),
    (60, 180, 75),
    (0, 130, 200),
    (255, 225, 25),
    (145, 30, 180),
    (245, 130, 48),
    (70, 240, 240),
    (240, 50, 230),
    (210, 245, 60),
    (0, 128, 128),
    (170, 110, 40),
    (128, 128, 128),
)

# BT.601 luma weights for explicit color-to-gray conversion.
_LUMA_WEIGHTS = (0.299, 0.587, 0.114)


@dataclass(frozen=True)
class QuantizationConfig:
    """Uniform binning applied to float-valued images before forming the
    value domain."""

    bins: int = 256
    low: float = 0.0
    high: float = 1.0

    def __post_init__(self) -> None:
        if self.bins < 2:
            raise ValueError("quantization needs at least two bins")
        if not self.low < self.high:
            raise ValueError("quantization range must be non-empty")


@dataclass(frozen=True, eq=False)
class ImagePlane:
    """A single-channel image whose pixels are levels of its value domain."""

    pixels: np.ndarray
    depth: str
    domain: ValueDomain

    def __post_init__(self) -> None:
        if self.pixels.ndim != 2 or self.pixels.size == 0:
            raise ValueError("an image plane must be a non-empty 2-D array")
        self.pixels.setflags(write=False)

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])


@dataclass(frozen=True, eq=False)
class LabelMask:
    """Per-pixel class ids; 0 = unlabeled. Nonemptiness of classes is a
    loader-level contract, not a structural one, so segmentation outputs and
    in-progress paint layers can use the same type."""

    labels: np.ndarray
    n_classes: int

    def __post_init__(self) -> None:
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.ndim != 2:
            raise ValueError("mask labels must be a 2-D array")
        if labels.size and labels.min() < 0:
            raise ValueError("class ids must be non-negative")
        if labels.size and labels.max() > self.n_classes:
            raise ValueError("a label exceeds the declared class count")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "n_classes", int(self.n_classes))
        self.labels.setflags(write=False)

    @property
    def width(self) -> int:
        return int(self.labels.shape[1])

    @property
    def height(self) -> int:
        return int(self.labels.shape[0])

    @property
    def class_ids(self) -> list[int]:
        present = np.unique(self.labels)
        return [int(c) for c in present if c > 0]


@dataclass(frozen=True, eq=False)
class SpectralStack:
    """Registered bands of one scene, all sharing dimensions."""

    bands: tuple[ImagePlane, ...]
    band_names: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.bands:
            raise ValueError("a stack needs at least one band")
        if len(self.band_names) != len(self.bands):
            raise ValueError("band_names must match bands")
        if len(set(self.band_names)) != len(self.band_names):
            raise ValueError("band names must be unique")
        w, h = self.bands[0].width, self.bands[0].height
        for band in self.bands[1:]:
            if band.width != w or band.height != h:
                raise DimensionMismatchError("stack bands differ in size")


def _decode(path: str | Path) -> Image.Image:
    try:
        img = Image.open(path)
        img.load()
    except FileNotFoundError:
        raise
    except UnidentifiedImageError as exc:
        raise UnsupportedFormatError(f"cannot decode {path}: {exc}") from exc
    except OSError as exc:
        raise UnsupportedFormatError(f"cannot decode {path}: {exc}") from exc
    return img


def _select_channel(arr: np.ndarray, channel: int | str | None, path) -> np.ndarray:
    n_channels = arr.shape[2]
    if channel is None:
        raise AmbiguousChannelsError(
            f"{path} has {n_channels} channels; pass a channel index or 'luma'"
        )
    if channel == "luma":
        if n_channels < 3:
            raise AmbiguousChannelsError("luma conversion needs at least three channels")
        r, g, b = (arr[:, :, i].astype(np.float64) for i in range(3))
        luma = _LUMA_WEIGHTS[0] * r + _LUMA_WEIGHTS[1] * g + _LUMA_WEIGHTS[2] * b
        if np.issubdtype(arr.dtype, np.integer):
            return np.round(luma).astype(arr.dtype)
        return luma
    idx = int(channel)
    if not 0 <= idx < n_channels:
        raise AmbiguousChannelsError(f"channel {idx} out of range for {n_channels}-channel image")
    return arr[:, :, idx]


def _quantize(values: np.ndarray, quant: QuantizationConfig) -> np.ndarray:
    """Map float values to the centers of uniform bins over [low, high]."""
    width = (quant.high - quant.low) / quant.bins
    clipped = np.clip(values.astype(np.float64), quant.low, quant.high)
    idx = np.minimum(((clipped - quant.low) / width).astype(np.int64), quant.bins - 1)
    return quant.low + (idx + 0.5) * width


def load_image(
    path: str | Path,
    quant: QuantizationConfig | None = None,
    channel: int | str | None = None,
    nominal_range: tuple[float, float] | None = None,
) -> ImagePlane:
    """Decode a raster file into a single-channel plane with a value domain.

    Multi-channel images require ``channel`` (an index, or ``"luma"`` for an
    ITU-style weighted gray). ``nominal_range`` overrides the storage
    format's default potential-contrast range.
    """
    quant = quant or QuantizationConfig()
    img = _decode(path)
    arr = np.asarray(img)
    if arr.ndim == 3:
        arr = _select_channel(arr, channel, path)
    elif img.mode == "P":
        arr = np.asarray(img.convert("L"))
    elif img.mode == "1":
        arr = np.asarray(img.convert("L"))

    if arr.ndim != 2:
        raise UnsupportedFormatError(f"{path}: unsupported image layout {img.mode!r}")

    if np.issubdtype(arr.dtype, np.floating):
        pixels = _quantize(arr, quant)
        depth = DEPTH_F32Q
        default_range = (quant.low, quant.high)
    elif arr.dtype == np.uint8:
        pixels = arr
        depth = DEPTH_U8
        default_range = (0.0, 255.0)
    elif np.issubdtype(arr.dtype, np.integer):
        if arr.min() < 0 or arr.max() > 65535:
            raise UnsupportedFormatError(
                f"{path}: integer values outside the 16-bit range are not supported"
            )
        pixels = arr.astype(np.uint16)
        depth = DEPTH_U16
        default_range = (0.0, 65535.0)
    else:
        raise UnsupportedFormatError(f"{path}: unsupported pixel type {arr.dtype}")

    levels = np.unique(pixels)
    if levels.size < 2:
        raise InputError(f"{path}: constant image, contrast is undefined")
    lo, hi = nominal_range if nominal_range is not None else default_range
    domain = ValueDomain(levels.astype(np.float64), float(lo), float(hi))
    return ImagePlane(pixels=pixels, depth=depth, domain=domain)


def load_label_mask(path: str | Path, image: ImagePlane) -> LabelMask:
    """Read a class-id mask and validate it against ``image``.

    Class ids must be contiguous from 1; a declared id with zero pixels is
    an error rather than a silent empty class.
    """
    img = _decode(path)
    if img.mode in ("RGB", "RGBA"):
        raise UnsupportedFormatError(f"{path}: masks must be indexed or grayscale, not color")
    arr = np.asarray(img)
    if arr.ndim != 2:
        raise UnsupportedFormatError(f"{path}: masks must be single-channel")
    labels = arr.astype(np.int64)
    if labels.shape != image.pixels.shape:
        raise DimensionMismatchError(
            f"mask is {labels.shape[1]}x{labels.shape[0]}, image is {image.width}x{image.height}"
        )
    present = {int(v) for v in np.unique(labels) if v > 0}
    if not present:
        raise EmptyClassInMaskError(f"{path}: mask labels no pixels")
    n_classes = max(present)
    missing = sorted(set(range(1, n_classes + 1)) - present)
    if missing:
        raise EmptyClassInMaskError(f"{path}: class {missing[0]} has no labeled pixels")
    return LabelMask(labels=labels, n_classes=n_classes)


def extract_samples(image: ImagePlane, mask: LabelMask) -> list[ClassSamples]:
    """One ClassSamples per class id, holding the image levels at that
    class's labeled coordinates."""
    if mask.labels.shape != image.pixels.shape:
        raise DimensionMismatchError("mask and image dimensions differ")
    return [
        ClassSamples(k, np.asarray(image.pixels[mask.labels == k], dtype=np.float64))
        for k in range(1, mask.n_classes + 1)
    ]


def class_distributions(image: ImagePlane, mask: LabelMask) -> list[DiscreteDistribution]:
    return [build_distribution(s, image.domain) for s in extract_samples(image, mask)]


def segment_image(image: ImagePlane, lut: ClassifierLUT) -> LabelMask:
    """Classify every pixel by its level. Levels without an explicit LUT
    assignment resolve through the LUT's unseen policy (class 0 when
    unassigned)."""
    if lut.domain != image.domain:
        raise DomainMismatchError("LUT was built on a different value domain")
    classes = lut.apply_to_levels(image.pixels.ravel()).reshape(image.pixels.shape)
    return LabelMask(labels=classes, n_classes=lut.n_classes)


def save_label_mask(mask: LabelMask, path: str | Path) -> None:
    """Write class ids as an 8-bit grayscale PNG."""
    Path(path).write_bytes(mask_png_bytes(mask))


def mask_png_bytes(mask: LabelMask) -> bytes:
    if mask.n_classes > 255:
        raise ValueError("cannot encode more than 255 classes in an 8-bit mask")
    return _encode_png(mask.labels.astype(np.uint8), "L")


def colorize_mask(mask: LabelMask, palette=DEFAULT_PALETTE) -> np.ndarray:
    """RGBA rendering of a mask: class 0 transparent, classes cycled through
    the palette."""
    table = np.zeros((mask.n_classes + 1, 4), dtype=np.uint8)
    for k in range(1, mask.n_classes + 1):
        r, g, b = palette[(k - 1) % len(palette)]
        table[k] = (r, g, b, 255)
    return table[mask.labels]


def colorized_png_bytes(mask: LabelMask, palette=DEFAULT_PALETTE) -> bytes:
    return _encode_png(colorize_mask(mask, palette), "RGBA")


def save_colorized_mask(mask: LabelMask, path: str | Path, palette=DEFAULT_PALETTE) -> None:
    Path(path).write_bytes(colorized_png_bytes(mask, palette))


def render_preview_u8(image: ImagePlane) -> np.ndarray:
    """8-bit rendering of a plane for display, scaled by its nominal range."""
    if image.depth == DEPTH_U8:
        return image.pixels.astype(np.uint8)
    span = image.domain.nominal_range
    scaled = (image.pixels.astype(np.float64) - image.domain.nominal_min) / span
    return np.round(np.clip(scaled, 0.0, 1.0) * 255.0).astype(np.uint8)


def image_png_bytes(image: ImagePlane) -> bytes:
    return _encode_png(render_preview_u8(image), "L")


def _encode_png(arr: np.ndarray, mode: str) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(arr, mode=mode).save(buf, format="PNG")
    return buf.getvalue()


def load_stack(
    manifest_path: str | Path,
    quant: QuantizationConfig | None = None,
    channel: int | str | None = None,
    nominal_range: tuple[float, float] | None = None,
) -> SpectralStack:
    """Load a band stack from a JSON manifest: ``{"bands": [{"name": ...,
    "path": ...}, ...]}`` with paths relative to the manifest."""
    manifest_path = Path(manifest_path)
    try:
        doc = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{manifest_path}: invalid manifest JSON: {exc}") from exc
    entries = doc.get("bands")
    if not isinstance(entries, list) or not entries:
        raise InputError(f"{manifest_path}: manifest must list at least one band")
    bands: list[ImagePlane] = []
    names: list[str] = []
    for entry in entries:
        if not isinstance(entry, dict) or "path" not in entry:
            raise InputError(f"{manifest_path}: each band entry needs a 'path'")
        band_path = manifest_path.parent / entry["path"]
        bands.append(load_image(band_path, quant=quant, channel=channel, nominal_range=nominal_range))
        names.append(str(entry.get("name", Path(entry["path"]).stem)))
    return SpectralStack(bands=tuple(bands), band_names=tuple(names))
