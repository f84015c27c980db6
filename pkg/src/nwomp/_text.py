"""Shared helpers for the plain-text and CSV file formats.

All writers are byte-deterministic: floats are rendered with ``repr``
(shortest round-tripping form) and complex numbers as ``re+imj`` with an
always-signed imaginary part.
"""

import numpy as np


class FormatError(ValueError):
    """A data file does not match its documented format."""


def fmt_float(x) -> str:
    return repr(float(x))


def fmt_complex(z) -> str:
    z = complex(z)
    return "%s%sj" % (repr(z.real), ("+" + repr(z.imag)) if z.imag >= 0 else repr(z.imag))


def parse_complex(token: str) -> complex:
    try:
        return complex(token)
    except ValueError as exc:
        raise FormatError("bad complex entry %r" % token) from exc


def parse_float(token: str) -> float:
    try:
        return float(token)
    except ValueError as exc:
        raise FormatError("bad numeric entry %r" % token) from exc


def data_lines(path):
    """Yield stripped, non-empty, non-comment ('#') lines of a text file."""
    with open(path, "r", encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                yield line


def comment_fields(path) -> dict:
    """Collect ``# key = value`` metadata comments from a file header."""
    out = {}
    with open(path, "r", encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if not line.startswith("#"):
                continue
            body = line[1:].strip()
            if "=" in body:
                key, _, val = body.partition("=")
                out[key.strip()] = val.strip()
    return out


def write_text(path, text: str) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(text)


def as_complex_vector(values, name="vector") -> np.ndarray:
    arr = np.asarray(values, dtype=np.complex128)
    if arr.ndim != 1:
        raise ValueError("%s must be one-dimensional, got shape %s" % (name, arr.shape))
    return arr
