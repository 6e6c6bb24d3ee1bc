"""Image and report file I/O.

Binary 8-bit PGM (P5) is the native format; PNG is accepted through
Pillow.  Structure-code images can be exported as min-max scaled 16-bit
PGM for visual debugging, or dumped as plain base-10 integers.
"""

import os

import numpy as np

from .errors import ImageIOError
from .geometry import GrayImage

__all__ = [
    "load_image",
    "save_image",
    "save_code_visualization",
    "save_code_dump",
    "load_code_dump",
]


def _read_pgm_tokens(data, count):
    """Yield the first `count` whitespace/comment-delimited header tokens
    and the offset just past them."""
    tokens = []
    i = 0
    while len(tokens) < count:
        if i >= len(data):
            raise ImageIOError("truncated PGM header")
        c = data[i : i + 1]
        if c == b"#":
            i = data.find(b"\n", i)
            if i < 0:
                raise ImageIOError("truncated PGM comment")
            i += 1
        elif c.isspace():
            i += 1
        else:
            j = i
            while j < len(data) and not data[j : j + 1].isspace():
                j += 1
            tokens.append(data[i:j])
            i = j
    return tokens, i


def _load_pgm(path):
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:2] != b"P5":
        raise ImageIOError(f"{path}: not a binary (P5) PGM file")
    try:
        tokens, offset = _read_pgm_tokens(data[2:], 3)
        width, height, maxval = (int(t) for t in tokens)
    except (ValueError, ImageIOError) as exc:
        raise ImageIOError(f"{path}: malformed PGM header ({exc})") from None
    if maxval > 255:
        raise ImageIOError(f"{path}: unsupported PGM depth (maxval {maxval} > 255)")
    if maxval < 1:
        raise ImageIOError(f"{path}: invalid maxval {maxval}")
    payload = data[2 + offset + 1 :]
    if len(payload) < width * height:
        raise ImageIOError(f"{path}: truncated PGM payload")
    pixels = np.frombuffer(payload[: width * height], dtype=np.uint8).reshape(height, width)
    return pixels.copy()


def _load_png(path):
    try:
        from PIL import Image
    except ImportError:
        raise ImageIOError("PNG support requires Pillow") from None
    with Image.open(path) as im:
        if im.mode not in ("L", "1"):
            raise ImageIOError(f"{path}: color or non-8-bit PNG inputs are rejected")
        return np.asarray(im.convert("L"), dtype=np.uint8)


def load_image(path, spacing=1.0):
    """Load an 8-bit grayscale image (PGM P5, or PNG)."""
    if not os.path.exists(path):
        raise ImageIOError(f"{path}: no such file")
    ext = os.path.splitext(path)[1].lower()
    if ext in (".pgm", ".pnm"):
        pixels = _load_pgm(path)
    elif ext == ".png":
        pixels = _load_png(path)
    else:
        raise ImageIOError(f"{path}: unsupported image format {ext!r}")
    return GrayImage(pixels=pixels, spacing=spacing)


def save_image(img, path):
    """Write an 8-bit image as binary PGM (P5) or PNG, by extension."""
    ext = os.path.splitext(path)[1].lower()
    if ext in (".pgm", ".pnm"):
        h, w = img.pixels.shape
        with open(path, "wb") as fh:
            fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
            fh.write(img.pixels.tobytes())
    elif ext == ".png":
        try:
            from PIL import Image
        except ImportError:
            raise ImageIOError("PNG support requires Pillow") from None
        Image.fromarray(img.pixels, mode="L").save(path)
    else:
        raise ImageIOError(f"{path}: unsupported image format {ext!r}")


def save_code_visualization(sci, path):
    """Export a structure-code image as min-max scaled 16-bit PGM."""
    codes = sci.codes.astype(np.float64)
    valid = sci.valid_mask
    scaled = np.zeros(codes.shape, dtype=np.uint16)
    if valid.any():
        lo = codes[valid].min()
        hi = codes[valid].max()
        if hi > lo:
            scaled[valid] = np.rint((codes[valid] - lo) / (hi - lo) * 65535).astype(np.uint16)
        else:
            scaled[valid] = 32768
    h, w = codes.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n65535\n".encode("ascii"))
        fh.write(scaled.astype(">u2").tobytes())


def save_code_dump(sci, path):
    """Dump raw structure codes: 'width height base' header, then one text
    row of base-10 integers per pixel row."""
    h, w = sci.codes.shape
    with open(path, "w") as fh:
        fh.write(f"{w} {h} {sci.base}\n")
        for row in sci.codes:
            fh.write(" ".join(str(int(v)) for v in row))
            fh.write("\n")


def load_code_dump(path):
    """Read back a code dump as (codes array, base)."""
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 3:
            raise ImageIOError(f"{path}: malformed code dump header")
        w, h, base = (int(t) for t in header)
        codes = np.loadtxt(fh, dtype=np.int64, ndmin=2)
    if codes.shape != (h, w):
        raise ImageIOError(f"{path}: dump payload {codes.shape} does not match header {(h, w)}")
    return codes, base
