"""Minimal BMP support: synthesize test carriers, inspect real ones.

Only the classic ``BITMAPINFOHEADER`` layout is handled, uncompressed, at
8 or 24 bits per pixel — the carrier formats the embedding engine knows how
to address.  Rows are stored bottom-up and padded to four-byte multiples;
8-bpp files carry a 256-entry grayscale palette.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

HEADER_LEN = 54          # 14-byte file header + 40-byte info header
PALETTE_LEN = 256 * 4
_FILE_HEADER = struct.Struct("<2sIHHI")
_INFO_HEADER = struct.Struct("<IiiHHIIiiII")


class BmpError(Exception):
    """Base class for BMP carrier problems."""


class NotBmp(BmpError):
    """The bytes do not look like a BMP this engine can address."""


class UnsupportedBpp(BmpError):
    """A real BMP, but at a depth other than 8 or 24 bits per pixel."""


@dataclass(frozen=True)
class BmpInfo:
    """Geometry distilled from a BMP header, enough to address carriers."""

    pixel_offset: int
    width: int
    height: int
    bits_per_pixel: int

    @property
    def bytes_per_pixel(self) -> int:
        return self.bits_per_pixel // 8

    @property
    def row_stride(self) -> int:
        """Stored row length: pixel bytes rounded up to a 4-byte multiple."""
        return (self.width * self.bytes_per_pixel + 3) // 4 * 4

    @property
    def row_data_bytes(self) -> int:
        return self.width * self.bytes_per_pixel

    @property
    def pixel_data_end(self) -> int:
        return self.pixel_offset + self.height * self.row_stride

    @property
    def capacity_bits(self) -> int:
        """One carrier byte per pixel: every byte at 8 bpp, red at 24 bpp."""
        return self.width * self.height


def parse_bmp_info(data: bytes) -> BmpInfo:
    """Distill :class:`BmpInfo` from the first 54 bytes of a file or stream.

    Raises :class:`NotBmp` for anything that is not a plausible uncompressed
    carrier and :class:`UnsupportedBpp` for BMPs at other pixel depths.
    A negative height (top-down row order) is folded to its magnitude: the
    byte layout is identical either way.
    """
    if len(data) < HEADER_LEN:
        raise NotBmp("need at least 54 header bytes")
    if data[:2] != b"BM":
        raise NotBmp("missing BM magic")
    pixel_offset = struct.unpack_from("<I", data, 10)[0]
    width = struct.unpack_from("<i", data, 18)[0]
    height = struct.unpack_from("<i", data, 22)[0]
    bpp = struct.unpack_from("<H", data, 28)[0]
    if bpp not in (8, 24):
        raise UnsupportedBpp(f"{bpp} bits per pixel")
    if width <= 0 or height == 0:
        raise NotBmp(f"degenerate dimensions {width}x{height}")
    if pixel_offset < HEADER_LEN:
        raise NotBmp("pixel data would overlap the header")
    return BmpInfo(
        pixel_offset=pixel_offset,
        width=width,
        height=abs(height),
        bits_per_pixel=bpp,
    )


def bmp_file_size(width: int, height: int, bpp: int = 24) -> int:
    """Size in bytes of a file :func:`make_bmp` would generate."""
    stride = (width * (bpp // 8) + 3) // 4 * 4
    palette = PALETTE_LEN if bpp == 8 else 0
    return HEADER_LEN + palette + height * stride


def _pixel_value(x: int, y: int, pattern: str):
    if pattern == "gradient":
        return x & 0xFF, y & 0xFF, (x * 7 + y * 13) & 0xFF
    if pattern == "even":
        return x & 0xFE, y & 0xFE, (x * 7 + y * 13) & 0xFE
    if pattern == "flat":
        return 0x80, 0x80, 0x80
    raise ValueError(f"unknown pattern {pattern!r}")


def make_bmp(width: int, height: int, bpp: int = 24, pattern: str = "gradient") -> bytes:
    """Deterministic synthetic BMP so tests and demos need no binary fixtures.

    ``pattern`` selects the pixel fill: ``gradient`` (varied low bits),
    ``even`` (all carrier bytes with LSB 0) or ``flat``.
    """
    if width < 1 or height < 1:
        raise ValueError("width and height must be positive")
    if bpp not in (8, 24):
        raise UnsupportedBpp(f"{bpp} bits per pixel")
    stride = (width * (bpp // 8) + 3) // 4 * 4
    padding = b"\x00" * (stride - width * (bpp // 8))
    pixel_offset = HEADER_LEN + (PALETTE_LEN if bpp == 8 else 0)
    image_size = height * stride

    out = bytearray()
    out += _FILE_HEADER.pack(b"BM", pixel_offset + image_size, 0, 0, pixel_offset)
    out += _INFO_HEADER.pack(40, width, height, 1, bpp, 0, image_size, 2835, 2835, 0, 0)
    if bpp == 8:
        for i in range(256):
            out += struct.pack("<BBBB", i, i, i, 0)
    for y in range(height):
        row = bytearray()
        if bpp == 24:
            for x in range(width):
                blue, green, red = _pixel_value(x, y, pattern)
                row += bytes((blue, green, red))
        else:
            for x in range(width):
                _, _, value = _pixel_value(x, y, pattern)
                row.append(value)
        out += row + padding
    return bytes(out)
