"""Vector file formats used by the command line.

``.csv``   one value per line (or comma separated); complex values as
           ``re,im`` lines
``.json``  a JSON array (complex values as ``[re, im]`` pairs)
``.bin``   raw little-endian signed 64-bit integers
``.hex``   hex string of little-endian unsigned coefficients, each
           ``width`` bytes (default: smallest width that holds q - 1)
"""

from __future__ import annotations

import csv
import io as _io
import json
from pathlib import Path

import numpy as np

from .core import ComplexRing, ModRing


def _hex_width(ring):
    if isinstance(ring, ModRing):
        return max(1, ((ring.q - 1).bit_length() + 7) // 8)
    return 8


def parse_vector(text, fmt, ring):
    if fmt == "json":
        data = json.loads(text)
        if isinstance(ring, ComplexRing):
            data = [complex(*v) if isinstance(v, list) else complex(v) for v in data]
        return ring.array(data)
    if fmt == "csv":
        rows = [r for r in csv.reader(_io.StringIO(text)) if any(c.strip() for c in r)]
        if isinstance(ring, ComplexRing):
            if all(len(r) == 2 for r in rows):
                return ring.array([complex(float(r[0]), float(r[1])) for r in rows])
            return ring.array([complex(float(c)) for r in rows for c in r if c.strip()])
        return ring.array([int(c) for r in rows for c in r if c.strip()])
    if fmt == "hex":
        raw = bytes.fromhex("".join(text.split()))
        w = _hex_width(ring)
        if len(raw) % w:
            raise ValueError(f"hex payload is not a multiple of {w} bytes")
        return ring.array([int.from_bytes(raw[i:i + w], "little") for i in range(0, len(raw), w)])
    raise ValueError(f"unknown format {fmt!r}")


def format_vector(values, fmt, ring):
    values = list(values)
    if fmt == "json":
        if isinstance(ring, ComplexRing):
            return json.dumps([[float(complex(v).real), float(complex(v).imag)] for v in values])
        return json.dumps([int(v) for v in values])
    if fmt == "csv":
        if isinstance(ring, ComplexRing):
            return "".join(f"{complex(v).real!r},{complex(v).imag!r}\n" for v in values)
        return "".join(f"{int(v)}\n" for v in values)
    if fmt == "hex":
        w = _hex_width(ring)
        return b"".join(int(v).to_bytes(w, "little") for v in values).hex() + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def _fmt(path):
    ext = Path(path).suffix.lower().lstrip(".")
    return {"txt": "csv"}.get(ext, ext)


def read_vector(path, ring, fmt=None):
    fmt = fmt or _fmt(path)
    if fmt == "bin":
        return ring.array(np.fromfile(path, dtype="<i8").astype(object))
    return parse_vector(Path(path).read_text(), fmt, ring)


def write_vector(path, values, ring, fmt=None):
    fmt = fmt or _fmt(path)
    if fmt == "bin":
        np.asarray([int(v) for v in values], dtype="<i8").tofile(path)
        return
    Path(path).write_text(format_vector(values, fmt, ring))
