"""Image and ground-truth I/O, color conversion, map rendering.

Array conventions used throughout the package:

* RGB image   -- uint8 array of shape (H, W, 3), sRGB.
* LAB image   -- float64 array of shape (H, W, 3), CIELAB (D65, 2 deg).
* gray map    -- float64 array of shape (H, W), values in [0, 1].
* binary mask -- bool array of shape (H, W).
"""

import io

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import ContractError, FormatError

# sRGB -> XYZ (D65, 2 deg observer), IEC 61966-2-1 primaries.
_RGB_TO_XYZ = np.array([
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
])
_WHITE_D65 = np.array([0.95047, 1.0, 1.08883])

_SUPPORTED_FORMATS = ("PNG", "JPEG")


def load_image(path):
    """Decode a PNG or JPEG file into a uint8 RGB array.

    Grayscale and palette sources are expanded to three channels; alpha is
    dropped. Raises OSError when the file cannot be read and FormatError
    when it is not a decodable PNG/JPEG.
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        with Image.open(io.BytesIO(raw)) as img:
            if img.format not in _SUPPORTED_FORMATS:
                raise FormatError(f"unsupported image format {img.format!r}: {path}")
            arr = np.asarray(img.convert("RGB"), dtype=np.uint8)
    except FormatError:
        raise
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise FormatError(f"cannot decode {path}: {exc}") from exc
    if arr.ndim != 3 or arr.shape[2] != 3 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise FormatError(f"decoded image has invalid shape {arr.shape}: {path}")
    return arr


def rgb_to_lab(img):
    """Convert a uint8 sRGB image (H, W, 3) to CIELAB float64.

    Chain: sRGB -> linear RGB (IEC 61966-2-1 transfer) -> XYZ (D65) -> LAB.
    """
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ContractError(f"expected an (H, W, 3) image, got shape {img.shape}")
    srgb = img.astype(np.float64) / 255.0
    linear = np.where(srgb <= 0.04045, srgb / 12.92, ((srgb + 0.055) / 1.055) ** 2.4)
    xyz = linear @ _RGB_TO_XYZ.T
    t = xyz / _WHITE_D65
    eps = (6.0 / 29.0) ** 3
    f = np.where(t > eps, np.cbrt(t), t / (3.0 * (6.0 / 29.0) ** 2) + 4.0 / 29.0)
    lab = np.empty_like(xyz)
    lab[..., 0] = 116.0 * f[..., 1] - 16.0
    lab[..., 1] = 500.0 * (f[..., 0] - f[..., 1])
    lab[..., 2] = 200.0 * (f[..., 1] - f[..., 2])
    return lab


def minmax_normalize(arr):
    """Scale an array to [0, 1]; a constant array maps to all zeros."""
    arr = np.asarray(arr, dtype=np.float64)
    lo = arr.min()
    hi = arr.max()
    if hi == lo:
        return np.zeros_like(arr)
    return (arr - lo) / (hi - lo)


def render_map(values, seg):
    """Paint per-superpixel values onto pixels, min-max normalized to [0, 1].

    ``values`` is a length-N vector (or any object with a ``values``
    attribute holding one, e.g. a SaliencyVector). Constant input renders
    as all zeros.
    """
    vec = np.asarray(getattr(values, "values", values), dtype=np.float64)
    if vec.ndim != 1 or vec.shape[0] != seg.count:
        raise ContractError(
            f"expected {seg.count} superpixel values, got shape {vec.shape}")
    return minmax_normalize(vec[seg.labels])


def quantize_u8(gray):
    """Quantize a [0, 1] gray map to uint8 with round-half-up.

    Shared by PNG output and the AUC threshold sweep so both see the same
    8-bit values.
    """
    arr = np.clip(np.asarray(gray, dtype=np.float64), 0.0, 1.0)
    return np.floor(arr * 255.0 + 0.5).astype(np.uint8)


def write_gray_png(gray, path):
    """Write a [0, 1] gray map as an 8-bit grayscale PNG (value = round(255 v))."""
    Image.fromarray(quantize_u8(gray), mode="L").save(path, format="PNG")


def read_gray_png(path):
    """Read an image file back into a [0, 1] gray map (8-bit precision)."""
    with Image.open(path) as img:
        arr = np.asarray(img.convert("L"), dtype=np.float64)
    return arr / 255.0


def load_mask(path):
    """Load a ground-truth mask: foreground iff the 8-bit value is > 127."""
    with Image.open(path) as img:
        arr = np.asarray(img.convert("L"))
    return arr > 127


def bilinear_resize(arr, out_h, out_w):
    """Bilinear resample of an (H, W) or (H, W, C) float array.

    Uses the pixel-center convention; edges are clamped.
    """
    arr = np.asarray(arr, dtype=np.float64)
    h, w = arr.shape[:2]
    if out_h < 1 or out_w < 1:
        raise ContractError(f"invalid output size {out_h}x{out_w}")
    if (h, w) == (out_h, out_w):
        return arr.copy()
    ys = np.clip((np.arange(out_h) + 0.5) * (h / out_h) - 0.5, 0.0, h - 1.0)
    xs = np.clip((np.arange(out_w) + 0.5) * (w / out_w) - 0.5, 0.0, w - 1.0)
    y0 = np.floor(ys).astype(np.intp)
    x0 = np.floor(xs).astype(np.intp)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    wy = ys - y0
    wx = xs - x0
    if arr.ndim == 3:
        wy = wy[:, None, None]
        wx = wx[None, :, None]
    else:
        wy = wy[:, None]
        wx = wx[None, :]
    top = arr[np.ix_(y0, x0)] * (1.0 - wx) + arr[np.ix_(y0, x1)] * wx
    bot = arr[np.ix_(y1, x0)] * (1.0 - wx) + arr[np.ix_(y1, x1)] * wx
    return top * (1.0 - wy) + bot * wy
