"""Minimal FMAP writer (the interchange format consumed downstream).

Layout, little-endian: magic "FMAP"; u32 version=1, source_w, source_h,
map_count; per map u32 scale_id, channels, grid_h, grid_w; then all
maps' float32 values, channel-major then row-major, in map order.
"""

import struct

import numpy as np

MAGIC = b"FMAP"
VERSION = 1


def write_fmap(path, source_w, source_h, maps):
    """maps: sequence of (scale_id, values) with values (c, gh, gw)."""
    head = [MAGIC, struct.pack("<IIII", VERSION, source_w, source_h, len(maps))]
    body = []
    for scale_id, values in maps:
        arr = np.ascontiguousarray(values, dtype="<f4")
        if arr.ndim != 3:
            raise ValueError("map values must be (channels, grid_h, grid_w)")
        if not np.isfinite(arr).all():
            raise ValueError("non-finite values in feature data")
        c, gh, gw = arr.shape
        head.append(struct.pack("<IIII", scale_id, c, gh, gw))
        body.append(arr.tobytes())
    with open(path, "wb") as fh:
        fh.write(b"".join(head))
        for chunk in body:
            fh.write(chunk)
