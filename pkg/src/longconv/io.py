"""Array containers on disk.

CSEQ1 layout: the 8-byte magic ``CSEQ0001``, then ``B``, ``H``, ``N`` as
little-endian uint64, then ``B*H*N`` little-endian float64 values with ``N``
innermost. The CSV form has a ``b,h,n,value`` header and one row per value.
"""

from __future__ import annotations

import io
import os
import struct
import tempfile

import numpy as np

MAGIC = b"CSEQ0001"
HEADER = struct.Struct("<8sQQQ")
CSV_HEADER = "b,h,n,value"


class FormatError(ValueError):
    """A file does not parse; ``offset`` is the byte where parsing stopped."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


def encode_cseq(data: np.ndarray) -> bytes:
    data = np.asarray(data, dtype="<f8")
    if data.ndim != 3:
        raise ValueError(f"CSEQ1 holds (B, H, N) arrays, got shape {data.shape}")
    return HEADER.pack(MAGIC, *data.shape) + np.ascontiguousarray(data).tobytes()


def decode_cseq(raw: bytes) -> np.ndarray:
    if len(raw) < HEADER.size:
        raise FormatError(f"file is {len(raw)} bytes, shorter than the {HEADER.size}-byte header",
                          len(raw))
    magic, b, h, n = HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}", 0)
    count = b * h * n
    need = HEADER.size + 8 * count
    if len(raw) < need:
        good = HEADER.size + 8 * ((len(raw) - HEADER.size) // 8)
        raise FormatError(f"truncated payload: expected {count} values for B={b}, H={h}, N={n}",
                          good)
    if len(raw) > need:
        raise FormatError("trailing bytes after payload", need)
    data = np.frombuffer(raw, dtype="<f8", count=count, offset=HEADER.size)
    data = data.astype(np.float64).reshape(b, h, n)
    if not np.all(np.isfinite(data)):
        bad = int(np.flatnonzero(~np.isfinite(data.ravel()))[0])
        raise FormatError("non-finite value", HEADER.size + 8 * bad)
    return data


def encode_csv(data: np.ndarray) -> bytes:
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 3:
        raise ValueError(f"CSV holds (B, H, N) arrays, got shape {data.shape}")
    buf = io.StringIO(newline="")
    buf.write(CSV_HEADER + "\n")
    for (b, h, n), v in np.ndenumerate(data):
        buf.write(f"{b},{h},{n},{float(v)!r}\n")
    return buf.getvalue().encode("ascii")


def decode_csv(raw: bytes) -> np.ndarray:
    try:
        text = raw.decode("ascii")
    except UnicodeDecodeError as exc:
        raise FormatError("non-ASCII bytes in CSV", exc.start) from None
    lines = text.split("\n")
    if lines[0].strip() != CSV_HEADER:
        raise FormatError(f"expected header {CSV_HEADER!r}", 0)
    offset = len(lines[0]) + 1
    entries = {}
    for line in lines[1:]:
        if line.strip():
            parts = line.strip().split(",")
            try:
                if len(parts) != 4:
                    raise ValueError
                b, h, n = (int(x) for x in parts[:3])
                v = float(parts[3])
                if min(b, h, n) < 0 or not np.isfinite(v):
                    raise ValueError
            except ValueError:
                raise FormatError(f"malformed row {line.strip()!r}", offset) from None
            if (b, h, n) in entries:
                raise FormatError(f"duplicate index ({b},{h},{n})", offset)
            entries[(b, h, n)] = v
        offset += len(line) + 1
    if not entries:
        raise FormatError("no data rows", len(raw))
    shape = tuple(max(idx[i] for idx in entries) + 1 for i in range(3))
    if len(entries) != shape[0] * shape[1] * shape[2]:
        raise FormatError(f"rows do not fill a {shape} grid", len(raw))
    data = np.empty(shape)
    for idx, v in entries.items():
        data[idx] = v
    return data


def detect_format(path: str, raw: bytes | None = None) -> str:
    if raw is not None and raw[:8] == MAGIC:
        return "cseq"
    if str(path).lower().endswith(".csv"):
        return "csv"
    return "cseq"


def read_array(path: str) -> tuple[np.ndarray, str]:
    """Read a ``(B, H, N)`` array; returns it with the detected format name."""
    with open(path, "rb") as fh:
        raw = fh.read()
    fmt = detect_format(path, raw)
    return (decode_csv(raw) if fmt == "csv" else decode_cseq(raw)), fmt


def atomic_write(path: str, payload: bytes):
    """Write to a sibling temp file and rename over ``path`` on success."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_array(path: str, data: np.ndarray, fmt: str = "cseq"):
    atomic_write(path, encode_csv(data) if fmt == "csv" else encode_cseq(data))
