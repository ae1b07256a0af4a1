"""Streaming luma readers for Y4M, planar YUV and image-sequence directories."""

from __future__ import annotations

import itertools
import math
import re
from pathlib import Path
from typing import Iterable, Iterator, Optional

import numpy as np

from ..errors import FormatUnknownError, TruncatedFileError
from ..frames import LumaFrame

IMAGE_SUFFIXES = (".png", ".pgm", ".ppm", ".pnm")


def _chroma_samples(chroma: str, w: int, h: int) -> int:
    cw, ch = math.ceil(w / 2), math.ceil(h / 2)
    if chroma.startswith("420"):
        return 2 * cw * ch
    if chroma.startswith("422"):
        return 2 * cw * h
    if chroma.startswith("444"):
        return 2 * w * h
    if chroma.startswith("mono"):
        return 0
    raise FormatUnknownError(f"unsupported Y4M colourspace {chroma!r}")


def _bit_depth_of(chroma: str) -> int:
    m = re.search(r"p(\d+)$", chroma)
    return int(m.group(1)) if m else 8


def _read_plane(fh, w, h, nbytes, index, path):
    need = w * h * nbytes
    buf = fh.read(need)
    if len(buf) != need:
        raise TruncatedFileError(f"{path}: frame {index} truncated", frame_index=index)
    dtype = "<u2" if nbytes == 2 else np.uint8
    return np.frombuffer(buf, dtype=dtype).reshape(h, w).astype(np.float64)


def _skip(fh, nbytes, index, path):
    if nbytes == 0:
        return
    got = len(fh.read(nbytes))
    if got != nbytes:
        raise TruncatedFileError(f"{path}: frame {index} chroma truncated", frame_index=index)


def read_y4m(path) -> Iterator[LumaFrame]:
    with open(path, "rb") as fh:
        header = fh.readline()
        if not header.startswith(b"YUV4MPEG2"):
            raise FormatUnknownError(f"{path}: missing YUV4MPEG2 signature")
        params = {}
        for tok in header.decode("ascii").split()[1:]:
            params[tok[0]] = tok[1:]
        w, h = int(params["W"]), int(params["H"])
        chroma = params.get("C", "420jpeg")
        bd = _bit_depth_of(chroma)
        nbytes = 2 if bd > 8 else 1
        chroma_bytes = _chroma_samples(chroma, w, h) * nbytes
        index = 0
        while True:
            marker = fh.readline()
            if not marker:
                return
            if not marker.startswith(b"FRAME"):
                raise TruncatedFileError(f"{path}: bad frame marker at frame {index}",
                                         frame_index=index)
            y = _read_plane(fh, w, h, nbytes, index, path)
            _skip(fh, chroma_bytes, index, path)
            yield LumaFrame(y, bd)
            index += 1


def read_yuv420(path, width: int, height: int, bit_depth: int = 8) -> Iterator[LumaFrame]:
    """Planar 4:2:0; samples wider than 8 bits are 16-bit little endian."""
    if not width or not height:
        raise ValueError("raw YUV needs width and height")
    nbytes = 2 if bit_depth > 8 else 1
    chroma_bytes = _chroma_samples("420", width, height) * nbytes
    frame_bytes = width * height * nbytes + chroma_bytes
    size = Path(path).stat().st_size
    if size % frame_bytes:
        raise TruncatedFileError(
            f"{path}: size {size} is not a multiple of the {width}x{height} frame size",
            frame_index=size // frame_bytes)
    with open(path, "rb") as fh:
        for index in range(size // frame_bytes):
            y = _read_plane(fh, width, height, nbytes, index, path)
            _skip(fh, chroma_bytes, index, path)
            yield LumaFrame(y, bit_depth)


def _frame_number(p: Path):
    nums = re.findall(r"\d+", p.stem)
    return (int(nums[-1]) if nums else -1, p.name)


def read_image_dir(path, bit_depth: Optional[int] = None) -> Iterator[LumaFrame]:
    """Numbered frames in a directory, ordered by the last number in the name."""
    from PIL import Image

    files = sorted((p for p in Path(path).iterdir() if p.suffix.lower() in IMAGE_SUFFIXES),
                   key=_frame_number)
    if not files:
        raise FormatUnknownError(f"{path}: no PNG/PGM frames found")
    for p in files:
        with Image.open(p) as im:
            if im.mode in ("I;16", "I;16B", "I;16L", "I"):
                arr = np.asarray(im, dtype=np.float64)
                bd = bit_depth or 16
            else:
                arr = np.asarray(im.convert("L"), dtype=np.float64)
                bd = bit_depth or 8
        yield LumaFrame(arr, bd)


def read_frames(path, width=None, height=None, bit_depth: int = 8) -> Iterator[LumaFrame]:
    """Lazily yield the luma plane of every frame of ``path``."""
    p = Path(path)
    if p.is_dir():
        return read_image_dir(p)
    suffix = p.suffix.lower()
    if suffix == ".y4m":
        return read_y4m(p)
    if suffix == ".yuv":
        return read_yuv420(p, width, height, bit_depth)
    raise FormatUnknownError(f"{path}: unknown frame container")


def write_y4m(path, frames: Iterable, bit_depth: int = 8, fps: str = "25:1") -> None:
    """Write luma planes as 4:2:0 Y4M with neutral chroma."""
    frames = iter(frames)
    first = next(frames)
    arrs = _frames_as_uint(first, frames, bit_depth)
    h, w = np.asarray(first.samples if isinstance(first, LumaFrame) else first).shape
    chroma = "420jpeg" if bit_depth == 8 else f"420p{bit_depth}"
    dtype = np.uint8 if bit_depth == 8 else np.dtype("<u2")
    neutral = np.full(_chroma_samples("420", w, h), 1 << (bit_depth - 1), dtype=dtype)
    with open(path, "wb") as fh:
        fh.write(f"YUV4MPEG2 W{w} H{h} F{fps} Ip A1:1 C{chroma}\n".encode("ascii"))
        for y in arrs:
            fh.write(b"FRAME\n")
            fh.write(y.astype(dtype).tobytes())
            fh.write(neutral.tobytes())


def write_yuv420(path, frames: Iterable, bit_depth: int = 8) -> None:
    frames = iter(frames)
    first = next(frames)
    h, w = np.asarray(first.samples if isinstance(first, LumaFrame) else first).shape
    dtype = np.uint8 if bit_depth == 8 else np.dtype("<u2")
    neutral = np.full(_chroma_samples("420", w, h), 1 << (bit_depth - 1), dtype=dtype)
    with open(path, "wb") as fh:
        for y in _frames_as_uint(first, frames, bit_depth):
            fh.write(y.astype(dtype).tobytes())
            fh.write(neutral.tobytes())


def _frames_as_uint(first, rest, bit_depth):
    peak = 2 ** bit_depth - 1
    for f in itertools.chain((first,), rest):
        a = f.samples if isinstance(f, LumaFrame) else np.asarray(f, dtype=np.float64)
        yield np.clip(np.rint(a), 0, peak)
