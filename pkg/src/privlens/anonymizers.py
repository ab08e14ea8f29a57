"""Classical region anonymization operators.

Each operator acts only inside the human :class:`RegionMask` and composites
its output back over the untouched input. ``lowres`` is the exception: it
resamples the whole frame and therefore demands a full-frame mask.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

from .model import (
    LoadError,
    PrivlensError,
    RasterImage,
    RegionMask,
    TimingLog,
    _list_images,
    read_image,
    read_mask,
    write_image,
)

log = logging.getLogger(__name__)

KINDS = ("blur", "pixelate", "emboss", "mask_black", "encrypt", "lowres")
DEFAULT_K = {"blur": 101, "pixelate": 20, "emboss": 3, "mask_black": 0, "encrypt": 0, "lowres": 30}

EMBOSS_KERNEL = np.array([[-2, -1, 0], [-1, 1, 1], [0, 1, 2]], dtype=np.int64)
EMBOSS_OFFSET = 128


class OperatorError(PrivlensError, ValueError):
    pass


@dataclass(frozen=True)
class OperatorSpec:
    kind: str
    k: int = 0
    key: bytes | None = None
    nonce: bytes | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise OperatorError(f"unknown operator {self.kind!r}; expected one of {KINDS}")
        k = self.k
        if self.kind == "blur" and (k < 3 or k % 2 == 0):
            raise OperatorError(f"blur kernel size must be odd and >= 3, got {k}")
        if self.kind in ("pixelate", "lowres") and k < 1:
            raise OperatorError(f"{self.kind} needs k >= 1, got {k}")
        if self.kind == "emboss" and k != 3:
            raise OperatorError(f"emboss kernel size must be 3, got {k}")
        if self.kind == "encrypt":
            if self.key is None or self.nonce is None:
                raise OperatorError("encrypt requires both key and nonce")
            if len(self.key) != 16 or len(self.nonce) != 16:
                raise OperatorError("encrypt key and nonce must be 16 bytes each")

    @classmethod
    def make(cls, kind: str, k: int | None = None, key: bytes | None = None,
             nonce: bytes | None = None) -> "OperatorSpec":
        """Build a spec, filling ``k`` with the operator's default when omitted."""
        return cls(kind, DEFAULT_K.get(kind, 0) if k is None else k, key, nonce)

    @property
    def label(self) -> str:
        if self.kind in ("mask_black", "encrypt"):
            return self.kind
        return f"{self.kind}_k{self.k}"


def _check_pair(img: RasterImage, mask: RegionMask) -> None:
    if img.shape != mask.shape:
        raise OperatorError(f"mask shape {mask.shape} does not match image shape {img.shape}")


def _composite(img: RasterImage, mask: RegionMask, filtered: np.ndarray) -> RasterImage:
    out = np.array(img.pixels)
    out[mask.bits] = filtered[mask.bits]
    return RasterImage(out)


def _round_half_up(x: np.ndarray) -> np.ndarray:
    return np.floor(x + 0.5)


# --------------------------------------------------------------------------- #
# Convolution helpers
# --------------------------------------------------------------------------- #


def gaussian_sigma(k: int) -> float:
    return 0.3 * ((k - 1) * 0.5 - 1) + 0.8


def gaussian_kernel_1d(k: int, sigma: float | None = None) -> np.ndarray:
    """Normalized 1-D Gaussian taps of length ``k``."""
    if sigma is None:
        sigma = gaussian_sigma(k)
    r = (k - 1) / 2
    x = np.arange(k, dtype=np.float64) - r
    g = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return g / g.sum()


def _separable_filter(plane: np.ndarray, taps: np.ndarray) -> np.ndarray:
    """Correlate a float (H, W, C) array with ``taps`` along both axes, edge-replicated."""
    r = len(taps) // 2
    padded = np.pad(plane, ((r, r), (0, 0), (0, 0)), mode="edge")
    h = plane.shape[0]
    tmp = np.zeros_like(plane, dtype=np.float64)
    for i, t in enumerate(taps):
        tmp += t * padded[i:i + h]
    padded = np.pad(tmp, ((0, 0), (r, r), (0, 0)), mode="edge")
    w = plane.shape[1]
    out = np.zeros_like(tmp)
    for i, t in enumerate(taps):
        out += t * padded[:, i:i + w]
    return out


# --------------------------------------------------------------------------- #
# Operators
# --------------------------------------------------------------------------- #


def blur_region(img: RasterImage, mask: RegionMask, k: int = 101) -> RasterImage:
    """Gaussian blur inside the mask with kernel size ``k`` and the k-derived sigma."""
    OperatorSpec("blur", k)
    _check_pair(img, mask)
    blurred = _separable_filter(img.pixels.astype(np.float64), gaussian_kernel_1d(k))
    return _composite(img, mask, np.clip(_round_half_up(blurred), 0, 255).astype(np.uint8))


def pixelate_region(img: RasterImage, mask: RegionMask, k: int = 20) -> RasterImage:
    """Replace masked pixels by the mean colour of their k x k block.

    Blocks tile the mask's bounding box from its top-left corner. The mean is
    taken over the masked pixels of each block, rounded half-up, which makes
    the operator idempotent.
    """
    OperatorSpec("pixelate", k)
    _check_pair(img, mask)
    bbox = mask.bounding_box()
    if bbox is None or k == 1:
        return img
    y0, x0, y1, x1 = bbox
    out = np.array(img.pixels)
    region = img.pixels[y0:y1, x0:x1].astype(np.int64)
    bits = mask.bits[y0:y1, x0:x1]
    for by in range(0, y1 - y0, k):
        for bx in range(0, x1 - x0, k):
            sel = bits[by:by + k, bx:bx + k]
            n = int(sel.sum())
            if n == 0:
                continue
            sums = region[by:by + k, bx:bx + k][sel].sum(axis=0)
            # integer half-up rounding of sums / n
            mean = (2 * sums + n) // (2 * n)
            block = out[y0 + by:y0 + by + sel.shape[0], x0 + bx:x0 + bx + sel.shape[1]]
            block[sel] = mean.astype(np.uint8)
    return RasterImage(out)


def emboss_region(img: RasterImage, mask: RegionMask, k: int = 3) -> RasterImage:
    """Emboss inside the mask: true 2-D convolution with the fixed 3x3 kernel, +128, clamped."""
    OperatorSpec("emboss", k)
    _check_pair(img, mask)
    kernel = EMBOSS_KERNEL[::-1, ::-1]
    src = np.pad(img.pixels.astype(np.int64), ((1, 1), (1, 1), (0, 0)), mode="edge")
    h, w = img.shape
    acc = np.zeros((h, w, 3), dtype=np.int64)
    for dy in range(3):
        for dx in range(3):
            acc += kernel[dy, dx] * src[dy:dy + h, dx:dx + w]
    return _composite(img, mask, np.clip(acc + EMBOSS_OFFSET, 0, 255).astype(np.uint8))


def mask_black_region(img: RasterImage, mask: RegionMask) -> RasterImage:
    _check_pair(img, mask)
    return _composite(img, mask, np.zeros_like(img.pixels))


def aes_ctr_keystream(key: bytes, nonce: bytes, length: int) -> bytes:
    """AES-128-CTR keystream; ``nonce`` is the initial 128-bit big-endian counter block."""
    enc = Cipher(algorithms.AES(key), modes.CTR(nonce)).encryptor()
    return enc.update(bytes(length)) + enc.finalize()


def encrypt_region(img: RasterImage, mask: RegionMask, key: bytes, nonce: bytes) -> RasterImage:
    """XOR the masked pixel bytes (row-major, RGB interleaved) with an AES-CTR keystream.

    Applying it twice with the same key and nonce restores the input.
    """
    OperatorSpec("encrypt", 0, key, nonce)
    _check_pair(img, mask)
    out = np.array(img.pixels)
    data = out[mask.bits]  # (n, 3), row-major scan order
    if data.size == 0:
        return img
    stream = np.frombuffer(aes_ctr_keystream(key, nonce, data.size), dtype=np.uint8).reshape(data.shape)
    out[mask.bits] = data ^ stream
    return RasterImage(out)


def bilinear_resize(arr: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resampling with half-pixel centres and edge clamping; returns float64."""
    arr = np.asarray(arr, dtype=np.float64)
    in_h, in_w = arr.shape[:2]

    def axis(n_out, n_in):
        src = (np.arange(n_out, dtype=np.float64) + 0.5) * (n_in / n_out) - 0.5
        src = np.clip(src, 0.0, n_in - 1)
        lo = np.floor(src).astype(np.int64)
        hi = np.minimum(lo + 1, n_in - 1)
        return lo, hi, src - lo

    ylo, yhi, fy = axis(out_h, in_h)
    xlo, xhi, fx = axis(out_w, in_w)
    extra = (None,) * (arr.ndim - 2)
    fy = fy[(slice(None), None, *extra)]
    fx = fx[(None, slice(None), *extra)]
    top = arr[ylo][:, xlo] * (1 - fx) + arr[ylo][:, xhi] * fx
    bot = arr[yhi][:, xlo] * (1 - fx) + arr[yhi][:, xhi] * fx
    return top * (1 - fy) + bot * fy


def resize_image(img: RasterImage, height: int, width: int) -> RasterImage:
    if img.shape == (height, width):
        return img
    out = bilinear_resize(img.pixels, height, width)
    return RasterImage(np.clip(_round_half_up(out), 0, 255).astype(np.uint8))


def lowres_region(img: RasterImage, mask: RegionMask, k: int = 30) -> RasterImage:
    """Downscale the whole frame to k x k and back up, both bilinear (the LR stage only)."""
    OperatorSpec("lowres", k)
    _check_pair(img, mask)
    if not mask.bits.all():
        raise OperatorError("lowres acts on the whole frame and requires a full-frame mask")
    small = bilinear_resize(img.pixels, k, k)
    small = np.clip(_round_half_up(small), 0, 255)
    up = bilinear_resize(small, img.height, img.width)
    return RasterImage(np.clip(_round_half_up(up), 0, 255).astype(np.uint8))


def apply(spec: OperatorSpec, img: RasterImage, mask: RegionMask) -> RasterImage:
    """Dispatch ``spec`` onto ``img`` within ``mask``."""
    _check_pair(img, mask)
    if spec.kind == "blur":
        return blur_region(img, mask, spec.k)
    if spec.kind == "pixelate":
        return pixelate_region(img, mask, spec.k)
    if spec.kind == "emboss":
        return emboss_region(img, mask, spec.k)
    if spec.kind == "mask_black":
        return mask_black_region(img, mask)
    if spec.kind == "encrypt":
        return encrypt_region(img, mask, spec.key, spec.nonce)
    return lowres_region(img, mask, spec.k)


def run_anonymize_job(spec: OperatorSpec, in_dir: str | Path, mask_dir: str | Path,
                      out_dir: str | Path) -> TimingLog | None:
    """Anonymize every image in ``in_dir`` and write results to ``out_dir``.

    Runs single-threaded in sorted id order; each frame's completion time
    covers mask loading plus the operator. ``lowres`` ignores ``mask_dir``
    contents and uses a full-frame mask. Returns None when fewer than two
    frames were processed, since throughput is then undefined.
    """
    images = _list_images(Path(in_dir))
    if not images:
        raise LoadError(f"no PNG/JPEG images in {in_dir}")
    masks = _list_images(Path(mask_dir)) if spec.kind != "lowres" else {}
    if spec.kind != "lowres":
        missing = sorted(set(images) - set(masks))
        if missing:
            raise LoadError(f"no mask for images {missing}", missing)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    frames = []
    for idx, image_id in enumerate(sorted(images)):
        img = read_image(images[image_id])
        if spec.kind == "lowres":
            mask = RegionMask.full(*img.shape)
        else:
            mask = read_mask(masks[image_id])
        try:
            result = apply(spec, img, mask)
        except OperatorError as exc:
            raise OperatorError(f"{image_id}: {exc}") from exc
        frames.append((idx, time.perf_counter()))
        write_image(out_dir / images[image_id].name, result)
        log.debug("anonymized %s with %s", image_id, spec.label)
    if len(frames) < 2:
        log.warning("only %d frame processed; no timing log", len(frames))
        return None
    return TimingLog(tuple(frames))
