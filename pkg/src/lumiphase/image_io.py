"""8-bit raster I/O (PNG, binary PPM/PGM) and the score-file format.

Pixels are normalized as value/255 on read; writes clamp to [0, 1] and
round half-up to bytes.  PPM/PGM are coded here directly so the byte
layout is fully pinned; PNG goes through Pillow.

Score files are CSV with header ``image,v,b``: one record per image id
(the file stem), scores as decimals in [0, 1].
"""

import csv
import os

import numpy as np
from PIL import Image

from .curves import PerceptualScores
from .errors import LumiphaseError

IMAGE_EXTENSIONS = (".png", ".ppm", ".pgm")


class ImageIOError(LumiphaseError):
    """Unreadable, unwritable or unsupported image file."""


def to_bytes(img):
    """Clamp to [0, 1] and round half-up to uint8."""
    img = np.asarray(img, dtype=np.float64)
    return np.floor(np.clip(img, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def _read_pnm(path):
    with open(path, "rb") as fh:
        data = fh.read()
    magic = data[:2]
    if magic not in (b"P5", b"P6"):
        raise ImageIOError(f"{path}: only binary PGM (P5) and PPM (P6) are supported")
    # header tokens: magic, width, height, maxval; '#' starts a comment
    tokens = []
    pos = 2
    while len(tokens) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ImageIOError(f"{path}: truncated header")
        tokens.append(data[start:pos])
    pos += 1  # single whitespace after maxval
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise ImageIOError(f"{path}: bad header {tokens}") from exc
    if maxval != 255:
        raise ImageIOError(f"{path}: only 8-bit rasters supported (maxval={maxval})")
    channels = 3 if magic == b"P6" else 1
    count = width * height * channels
    raw = data[pos : pos + count]
    if len(raw) != count:
        raise ImageIOError(f"{path}: expected {count} pixel bytes, found {len(raw)}")
    arr = np.frombuffer(raw, dtype=np.uint8).reshape(height, width, channels)
    return arr


def _write_pnm(path, arr):
    height, width, channels = arr.shape
    magic = b"P6" if channels == 3 else b"P5"
    header = magic + f"\n{width} {height}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(arr.tobytes())


def read_image(path):
    """Read an 8-bit grayscale or RGB raster into a float (H, W, C) array."""
    ext = os.path.splitext(path)[1].lower()
    try:
        if ext in (".ppm", ".pgm"):
            arr = _read_pnm(path)
        else:
            with Image.open(path) as im:
                if im.mode == "L":
                    arr = np.asarray(im)[:, :, None]
                else:
                    arr = np.asarray(im.convert("RGB"))
    except (OSError, ValueError) as exc:
        raise ImageIOError(f"cannot read image {path}: {exc}") from exc
    return arr.astype(np.float64) / 255.0


def write_image(path, img):
    """Write a float image as an 8-bit raster; format follows the extension."""
    arr = to_bytes(img)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.shape[2] not in (1, 3):
        raise ImageIOError(f"cannot encode {arr.shape[2]}-channel image")
    ext = os.path.splitext(path)[1].lower()
    try:
        if ext in (".ppm", ".pgm"):
            if ext == ".pgm" and arr.shape[2] != 1:
                raise ImageIOError("PGM holds a single channel; use PPM or PNG")
            if ext == ".ppm" and arr.shape[2] != 3:
                raise ImageIOError("PPM holds three channels; use PGM or PNG")
            _write_pnm(path, arr)
        elif ext == ".png":
            mode = "L" if arr.shape[2] == 1 else "RGB"
            data = arr[:, :, 0] if mode == "L" else arr
            Image.fromarray(data, mode=mode).save(path, format="PNG")
        else:
            raise ImageIOError(f"unsupported output format {ext!r}")
    except OSError as exc:
        raise ImageIOError(f"cannot write image {path}: {exc}") from exc


def image_id(path):
    """Identifier used in score files: the file name without extension."""
    return os.path.splitext(os.path.basename(path))[0]


def read_scores(path):
    """Parse a score file into {image id: PerceptualScores}."""
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["image", "v", "b"]:
                raise ImageIOError(f"{path}: expected header 'image,v,b'")
            out = {}
            for row in reader:
                out[row["image"].strip()] = PerceptualScores(
                    v=float(row["v"]), b=float(row["b"]), provenance="file"
                )
            return out
    except OSError as exc:
        raise ImageIOError(f"cannot read scores {path}: {exc}") from exc
    except ValueError as exc:
        raise ImageIOError(f"{path}: bad score record: {exc}") from exc


def write_scores(path, scores_by_id):
    """Write a score file (CSV, header image,v,b)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["image", "v", "b"])
        for image, s in scores_by_id.items():
            writer.writerow([image, repr(float(s.v)), repr(float(s.b))])
