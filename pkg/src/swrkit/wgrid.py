"""Binary container for wave-field stacks (.wgrid).

Little-endian layout, in file order:

    magic        4 bytes   b"SWRV"
    version      u16       1
    nlat         u32
    nlon         u32
    nchan        u32       always 4
    ntime        u32
    lat_min      f64
    lat_max      f64
    lon_min      f64
    lon_max      f64
    step_seconds u32
    t0           i64       epoch seconds of frame 0
    channels     4 x (u8 length + UTF-8 name), fixed order
                 VHM0, VMDRX, VMDRY, VTPK
    mask         nlat*nlon u8, 1 = ocean, row-major
    payload      ntime*nchan*nlat*nlon f32, [time][chan][lat][lon]

write -> read is exact: header integers, bounds, timestamps, mask and the
float payload all round trip bit for bit.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import FormatError
from .grids import CHANNELS, FieldStack, GeoGrid, WaveFrame

MAGIC = b"SWRV"
VERSION = 1

_HEAD = struct.Struct("<4sHIIII4dIq")


def write_field_stack(path, stack):
    """Serialize a FieldStack to ``path``; errors on non-finite values."""
    payload = stack.values4d()
    if not np.all(np.isfinite(payload)):
        raise FormatError("refusing to write non-finite field values")
    g = stack.grid
    head = _HEAD.pack(MAGIC, VERSION, g.nlat, g.nlon, len(CHANNELS),
                      stack.ntime, g.lat_min, g.lat_max, g.lon_min, g.lon_max,
                      stack.step_seconds, stack.t0)
    names = b"".join(struct.pack("<B", len(n)) + n.encode("utf-8")
                     for n in CHANNELS)
    mask = np.ascontiguousarray(g.mask, dtype=np.uint8).tobytes()
    body = np.ascontiguousarray(payload, dtype="<f4").tobytes()
    with open(path, "wb") as fh:
        fh.write(head)
        fh.write(names)
        fh.write(mask)
        fh.write(body)


def read_field_stack(path):
    """Parse a .wgrid file back into a FieldStack; raises FormatError."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEAD.size:
        raise FormatError("truncated header")
    (magic, version, nlat, nlon, nchan, ntime,
     lat_min, lat_max, lon_min, lon_max,
     step_seconds, t0) = _HEAD.unpack_from(raw, 0)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}")
    if nchan != len(CHANNELS):
        raise FormatError(f"expected {len(CHANNELS)} channels, file has {nchan}")

    off = _HEAD.size
    for expected in CHANNELS:
        if off >= len(raw):
            raise FormatError("truncated channel table")
        n = raw[off]
        off += 1
        name = raw[off:off + n].decode("utf-8")
        off += n
        if name != expected:
            raise FormatError(f"channel {name!r} out of order, expected {expected!r}")

    need = nlat * nlon
    if len(raw) < off + need:
        raise FormatError("truncated mask")
    mask = np.frombuffer(raw, dtype=np.uint8, count=need, offset=off)
    mask = mask.reshape(nlat, nlon).astype(bool)
    off += need

    count = ntime * nchan * nlat * nlon
    if len(raw) != off + 4 * count:
        raise FormatError(
            f"payload length {len(raw) - off} != expected {4 * count}")
    payload = np.frombuffer(raw, dtype="<f4", count=count, offset=off)
    payload = payload.reshape(ntime, nchan, nlat, nlon).copy()

    grid = GeoGrid(lat_min, lat_max, lon_min, lon_max, nlat, nlon, mask)
    frames = [WaveFrame(t0 + i * step_seconds, payload[i]) for i in range(ntime)]
    return FieldStack(grid, frames, step_seconds)
