"""Grayscale raster images, binary PGM I/O, and first/second moment statistics.

The working plane is real-valued (float64) throughout the pipeline; integer
storage only happens at explicit quantize/save boundaries.  Arrays held by a
:class:`Raster` are frozen (non-writeable) so values can be shared freely.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, PgmParseError, PgmSizeError

_VALID_DEPTHS = (8, 16)


@dataclass(frozen=True)
class Raster:
    """A rectangular grayscale image with explicit storage bit depth.

    ``data`` is a (height, width) float64 plane of finite, nonnegative
    intensities.  The bit depth states how the image is (or will be) stored;
    working values may exceed the storage maximum until quantized.
    """

    width: int
    height: int
    bit_depth: int
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.bit_depth not in _VALID_DEPTHS:
            raise DomainError(f"bit_depth must be one of {_VALID_DEPTHS}, got {self.bit_depth}")
        if self.width < 2 or self.height < 2:
            raise DomainError(f"raster must be at least 2x2, got {self.width}x{self.height}")
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.shape != (self.height, self.width):
            raise DomainError(
                f"data shape {arr.shape} does not match {self.height}x{self.width}"
            )
        if not np.all(np.isfinite(arr)):
            raise DomainError("working intensities must be finite")
        if arr.min(initial=0.0) < 0.0:
            raise DomainError("working intensities must be nonnegative")
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def maxval(self) -> int:
        return (1 << self.bit_depth) - 1

    def scaled(self, factor: float) -> "Raster":
        """Return a copy with all intensities multiplied by ``factor`` > 0."""
        if factor <= 0:
            raise DomainError("scale factor must be positive")
        return Raster(self.width, self.height, self.bit_depth, self.data * factor)


@dataclass(frozen=True)
class ImageStats:
    mean: float
    variance: float
    min: float
    max: float


def raster_from_array(arr, bit_depth: int = 8) -> Raster:
    arr = np.asarray(arr, dtype=np.float64)
    if arr.ndim != 2:
        raise DomainError(f"expected a 2-D array, got ndim={arr.ndim}")
    h, w = arr.shape
    return Raster(width=w, height=h, bit_depth=bit_depth, data=arr)


def stats(r: Raster) -> ImageStats:
    """Population mean/variance (divisor = pixel count) plus min and max."""
    x = r.data
    mean = float(x.mean())
    var = float(np.mean((x - mean) ** 2))
    return ImageStats(mean=mean, variance=var, min=float(x.min()), max=float(x.max()))


def quantize(r: Raster | np.ndarray, bit_depth: int) -> tuple[Raster, int]:
    """Round the working plane to integers and clamp to the storage range.

    Rounding is half-away-from-zero.  Returns the quantized raster and the
    number of pixels that had to be clamped into [0, 2**bit_depth - 1].
    """
    if bit_depth not in _VALID_DEPTHS:
        raise DomainError(f"bit_depth must be one of {_VALID_DEPTHS}, got {bit_depth}")
    arr = r.data if isinstance(r, Raster) else np.asarray(r, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise DomainError("cannot quantize non-finite intensities")
    rounded = np.sign(arr) * np.floor(np.abs(arr) + 0.5)
    maxval = (1 << bit_depth) - 1
    clamped = int(np.count_nonzero((rounded < 0.0) | (rounded > maxval)))
    out = np.clip(rounded, 0.0, float(maxval))
    return raster_from_array(out, bit_depth=bit_depth), clamped


def _next_token(buf: io.BytesIO) -> bytes:
    """Read one whitespace-delimited header token, dropping # comments."""
    token = b""
    while True:
        c = buf.read(1)
        if c == b"":
            if token:
                return token
            raise PgmParseError("unexpected end of header")
        if c == b"#":
            while c not in (b"\n", b"", b"\r"):
                c = buf.read(1)
            continue
        if c.isspace():
            if token:
                return token
            continue
        token += c


def _parse_header_int(token: bytes, what: str) -> int:
    try:
        value = int(token)
    except ValueError:
        raise PgmParseError(f"invalid {what} token {token!r}") from None
    if value <= 0:
        raise PgmParseError(f"invalid {what} token {token!r}: must be positive")
    return value


def raster_from_pgm_bytes(blob: bytes) -> Raster:
    buf = io.BytesIO(blob)
    magic = _next_token(buf)
    if magic != b"P5":
        raise PgmParseError(f"invalid magic token {magic!r}: expected b'P5'")
    width = _parse_header_int(_next_token(buf), "width")
    height = _parse_header_int(_next_token(buf), "height")
    maxval = _parse_header_int(_next_token(buf), "maxval")
    if maxval == 255:
        bit_depth, dtype = 8, np.dtype("u1")
    elif maxval == 65535:
        bit_depth, dtype = 16, np.dtype(">u2")
    else:
        raise PgmParseError(f"unsupported maxval token {maxval!r}: expected 255 or 65535")
    payload = buf.read()
    expected = width * height * dtype.itemsize
    if len(payload) != expected:
        raise PgmSizeError(
            f"payload is {len(payload)} bytes, header promises {expected} "
            f"({width}x{height} at {dtype.itemsize} byte(s)/sample)"
        )
    samples = np.frombuffer(payload, dtype=dtype).astype(np.float64)
    return Raster(width, height, bit_depth, samples.reshape(height, width))


def pgm_bytes(r: Raster) -> bytes:
    """Serialize in canonical form: ``P5\\n<w> <h>\\n<maxval>\\n`` + payload.

    16-bit samples are written big-endian.  The working plane must already be
    integral and inside the storage range (quantize first if unsure).
    """
    arr = r.data
    if not np.array_equal(arr, np.floor(arr)):
        raise DomainError("raster holds non-integral intensities; quantize before saving")
    if arr.max(initial=0.0) > r.maxval:
        raise DomainError(f"intensity {arr.max()} exceeds maxval {r.maxval}")
    dtype = np.dtype("u1") if r.bit_depth == 8 else np.dtype(">u2")
    header = f"P5\n{r.width} {r.height}\n{r.maxval}\n".encode("ascii")
    return header + arr.astype(dtype).tobytes()


def load_pgm(path) -> Raster:
    """Read a binary PGM (P5) file with maxval 255 or 65535."""
    with open(path, "rb") as fh:
        return raster_from_pgm_bytes(fh.read())


def save_pgm(r: Raster, path) -> None:
    """Write a binary PGM (P5) file; byte-exact round-trip with load_pgm."""
    with open(path, "wb") as fh:
        fh.write(pgm_bytes(r))
