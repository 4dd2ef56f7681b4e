"""FMAP tensor interchange format.

Layout, all little-endian:
  bytes 0..3   magic "FMAP"
  u32          version (currently 1)
  u32          source_w
  u32          source_h
  u32          map_count
  per map:     u32 scale_id, u32 channels, u32 grid_h, u32 grid_w
  then all maps' values concatenated as IEEE-754 float32,
  channel-major then row-major, in map order.
"""

import struct

import numpy as np

from .features import FeatureMap, FeatureStack

MAGIC = b"FMAP"
VERSION = 1
_U32 = struct.Struct("<I")


def write_feature_stack(stack: FeatureStack, path) -> None:
    """Serialize a stack; values are stored as float32."""
    parts = [MAGIC]
    for v in (VERSION, stack.source_w, stack.source_h, len(stack.maps)):
        parts.append(_U32.pack(v))
    payload = []
    for m in stack.maps:
        for v in (m.scale_id, m.channels, m.grid_h, m.grid_w):
            parts.append(_U32.pack(v))
        vals = np.ascontiguousarray(m.values, dtype="<f4")
        payload.append(vals.tobytes())
    with open(path, "wb") as fh:
        fh.write(b"".join(parts))
        for chunk in payload:
            fh.write(chunk)


def read_feature_stack(path) -> FeatureStack:
    """Parse and validate an FMAP file; values come back bit-exact."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 4 or data[:4] != MAGIC:
        raise ValueError("bad magic: not an FMAP file")
    pos = 4

    def take_u32():
        nonlocal pos
        if pos + 4 > len(data):
            raise ValueError("shape/length mismatch: truncated header")
        (v,) = _U32.unpack_from(data, pos)
        pos += 4
        return v

    version = take_u32()
    if version != VERSION:
        raise ValueError(f"version mismatch: got {version}, expected {VERSION}")
    source_w = take_u32()
    source_h = take_u32()
    map_count = take_u32()
    if source_w < 1 or source_h < 1:
        raise ValueError("shape/length mismatch: zero source dimension")
    if map_count < 1:
        raise ValueError("shape/length mismatch: no maps declared")
    headers = []
    for _ in range(map_count):
        scale_id = take_u32()
        channels = take_u32()
        grid_h = take_u32()
        grid_w = take_u32()
        if channels < 1 or grid_h < 1 or grid_w < 1:
            raise ValueError("shape/length mismatch: zero map dimension")
        headers.append((scale_id, channels, grid_h, grid_w))
    total = sum(c * gh * gw for _, c, gh, gw in headers)
    expected = pos + 4 * total
    if len(data) != expected:
        raise ValueError(
            f"shape/length mismatch: {len(data) - pos} payload bytes, expected {4 * total}"
        )
    flat = np.frombuffer(data, dtype="<f4", offset=pos)
    if not np.isfinite(flat).all():
        raise ValueError("non-finite values in feature data")
    maps = []
    at = 0
    for scale_id, channels, grid_h, grid_w in headers:
        count = channels * grid_h * grid_w
        vals = flat[at : at + count].reshape(channels, grid_h, grid_w).copy()
        maps.append(FeatureMap(scale_id=scale_id, values=vals))
        at += count
    return FeatureStack(source_w=source_w, source_h=source_h, maps=tuple(maps))
