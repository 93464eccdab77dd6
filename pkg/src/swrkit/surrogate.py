"""Spectral surrogate for the wave-field tendency, with manual backprop.

Architecture (channel-last internally):

    x (4 raw channels) -> normalize -> lift (4 -> width)
      -> [spectral conv + pointwise linear] -> GELU      (layer 1)
      -> [spectral conv + pointwise linear]              (layer 2, no GELU)
      -> project (width -> 4) -> mask land -> scale back to raw units

The output is a tendency in raw field units per model step.  A
``linear_mode`` flag skips the GELU so linear test configurations can be
checked in closed form.  ``tendency_backward`` implements the exact
adjoint of ``tendency``; gradients of complex weights use the
d/dRe + i d/dIm convention throughout.

Weights serialize to the .wgts container documented at `save_weights`.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace

import numpy as np

from .errors import FormatError
from .spectral import (gelu, gelu_grad, n_canonical_modes, spectral_conv,
                       spectral_conv_backward)

N_IN = 4


@dataclass(frozen=True)
class SurrogateWeights:
    """All trainable parameters plus the fixed channel normalization."""

    kmax: int
    width: int
    lift_w: np.ndarray      # (4, width)
    lift_b: np.ndarray      # (width,)
    spec1: np.ndarray       # ((2*kmax+1)^2, width, width) complex
    pw1_w: np.ndarray       # (width, width)
    pw1_b: np.ndarray       # (width,)
    spec2: np.ndarray
    pw2_w: np.ndarray
    pw2_b: np.ndarray
    proj_w: np.ndarray      # (width, 4)
    proj_b: np.ndarray      # (4,)
    norm_mean: np.ndarray   # (4,) input offset, not trained
    norm_scale: np.ndarray  # (4,) input/output scale, not trained

    # names of the trainable groups, in file and update order
    GROUPS = ("lift_w", "lift_b", "spec1", "pw1_w", "pw1_b",
              "spec2", "pw2_w", "pw2_b", "proj_w", "proj_b")
    COMPLEX_GROUPS = ("spec1", "spec2")
    # weight decay applies to weight matrices and spectral tables; biases
    # are exempt
    DECAY_GROUPS = ("lift_w", "spec1", "pw1_w", "spec2", "pw2_w", "proj_w")

    def updated(self, grads, step_size, weight_decay=0.0):
        """New weights after one gradient step (decay on non-bias groups)."""
        new = {}
        for name in self.GROUPS:
            w = getattr(self, name)
            g = grads[name]
            if weight_decay and name in self.DECAY_GROUPS:
                g = g + weight_decay * w
            new[name] = w - step_size * g
        return replace(self, **new)


def expected_shapes(kmax, width):
    m = n_canonical_modes(kmax)
    return {
        "lift_w": (N_IN, width), "lift_b": (width,),
        "spec1": (m, width, width), "pw1_w": (width, width), "pw1_b": (width,),
        "spec2": (m, width, width), "pw2_w": (width, width), "pw2_b": (width,),
        "proj_w": (width, N_IN), "proj_b": (N_IN,),
        "norm_mean": (N_IN,), "norm_scale": (N_IN,),
    }


def zero_weights(kmax=1, width=2):
    """Weights whose tendency is identically zero.

    Stepping with them reproduces the initial frame, so they serve as the
    persistence fallback wherever trained weights are optional.
    """
    w = init_weights(kmax, width, seed=0)
    return replace(w, **{k: np.zeros_like(getattr(w, k)) for k in w.GROUPS})


def init_weights(kmax, width, seed, spectral_scale=0.0,
                 norm_mean=None, norm_scale=None):
    """Seeded random initialization.

    Spectral tables start at zero by default (spectral_scale=0), which makes
    the initial tendency a small pointwise map and the initial rollout
    nearly persistence; gradients still reach the spectral tables through
    the pointwise paths.
    """
    rng = np.random.default_rng(seed)
    m = n_canonical_modes(kmax)

    def cplx(shape, scale):
        return (rng.normal(scale=scale, size=shape)
                + 1j * rng.normal(scale=scale, size=shape)).astype(np.complex128)

    return SurrogateWeights(
        kmax=kmax, width=width,
        lift_w=rng.normal(scale=0.5, size=(N_IN, width)),
        lift_b=np.zeros(width),
        spec1=cplx((m, width, width), spectral_scale) if spectral_scale
        else np.zeros((m, width, width), dtype=np.complex128),
        pw1_w=rng.normal(scale=1.0 / np.sqrt(width), size=(width, width)),
        pw1_b=np.zeros(width),
        spec2=cplx((m, width, width), spectral_scale) if spectral_scale
        else np.zeros((m, width, width), dtype=np.complex128),
        pw2_w=rng.normal(scale=1.0 / np.sqrt(width), size=(width, width)),
        pw2_b=np.zeros(width),
        proj_w=rng.normal(scale=0.1 / np.sqrt(width), size=(width, N_IN)),
        proj_b=np.zeros(N_IN),
        norm_mean=np.zeros(N_IN) if norm_mean is None else np.asarray(norm_mean, float),
        norm_scale=np.ones(N_IN) if norm_scale is None else np.asarray(norm_scale, float),
    )


def tendency(values, mask, w, linear_mode=False, want_cache=False):
    """Tendency of the wave state, (4, nlat, nlon) float64 in raw units.

    Zero on land cells.  With ``want_cache`` also returns the forward
    intermediates `tendency_backward` needs.
    """
    x = np.asarray(values, dtype=np.float64)
    xn = (x - w.norm_mean[:, None, None]) / w.norm_scale[:, None, None]
    v = np.moveaxis(xn, 0, -1)                       # (nlat, nlon, 4)

    h0 = v @ w.lift_w + w.lift_b
    s1, sc1 = spectral_conv(h0, w.spec1, w.kmax)
    z1 = s1 + h0 @ w.pw1_w + w.pw1_b
    a1 = z1 if linear_mode else gelu(z1)
    s2, sc2 = spectral_conv(a1, w.spec2, w.kmax)
    z2 = s2 + a1 @ w.pw2_w + w.pw2_b
    o = (z2 @ w.proj_w + w.proj_b) * mask[:, :, None]

    out = np.moveaxis(o, -1, 0) * w.norm_scale[:, None, None]
    if not want_cache:
        return out
    cache = {"v": v, "h0": h0, "sc1": sc1, "z1": z1, "a1": a1,
             "sc2": sc2, "z2": z2, "mask": mask, "linear": linear_mode}
    return out, cache


def tendency_backward(g_out, w, cache):
    """Exact adjoint of `tendency`.

    g_out: dL/d(tendency), (4, nlat, nlon).  Returns (grads, g_values)
    where grads maps each trainable group name to its gradient array.
    """
    mask = cache["mask"]
    g_o = np.moveaxis(g_out * w.norm_scale[:, None, None], 0, -1)
    g_o = g_o * mask[:, :, None]

    z2, a1, z1, h0, v = (cache["z2"], cache["a1"], cache["z1"],
                         cache["h0"], cache["v"])

    grad_proj_w = np.einsum("hwi,hwo->io", z2, g_o)
    grad_proj_b = g_o.sum(axis=(0, 1))
    g_z2 = g_o @ w.proj_w.T

    grad_pw2_w = np.einsum("hwi,hwo->io", a1, g_z2)
    grad_pw2_b = g_z2.sum(axis=(0, 1))
    grad_spec2, g_a1_spec = spectral_conv_backward(g_z2, w.spec2, w.kmax,
                                                   cache["sc2"])
    g_a1 = g_z2 @ w.pw2_w.T + g_a1_spec

    g_z1 = g_a1 if cache["linear"] else g_a1 * gelu_grad(z1)

    grad_pw1_w = np.einsum("hwi,hwo->io", h0, g_z1)
    grad_pw1_b = g_z1.sum(axis=(0, 1))
    grad_spec1, g_h0_spec = spectral_conv_backward(g_z1, w.spec1, w.kmax,
                                                   cache["sc1"])
    g_h0 = g_z1 @ w.pw1_w.T + g_h0_spec

    grad_lift_w = np.einsum("hwc,hwo->co", v, g_h0)
    grad_lift_b = g_h0.sum(axis=(0, 1))
    g_v = g_h0 @ w.lift_w.T

    g_values = np.moveaxis(g_v, -1, 0) / w.norm_scale[:, None, None]
    grads = {"lift_w": grad_lift_w, "lift_b": grad_lift_b,
             "spec1": grad_spec1, "pw1_w": grad_pw1_w, "pw1_b": grad_pw1_b,
             "spec2": grad_spec2, "pw2_w": grad_pw2_w, "pw2_b": grad_pw2_b,
             "proj_w": grad_proj_w, "proj_b": grad_proj_b}
    return grads, g_values


# --- .wgts container ----------------------------------------------------
#
# little endian:
#   magic   4 bytes  b"SWRW"
#   version u16      1
#   kmax    u32
#   width   u32
#   then, per parameter group in fixed order (trainable groups followed by
#   norm_mean, norm_scale):
#     u8 name length + UTF-8 name
#     u64 element count
#     payload: f32 singles for real groups, (re, im) f32 pairs for the
#     complex groups spec1/spec2
#
# Values are stored at f32 precision, so save -> load -> save is
# byte-identical.

WGTS_MAGIC = b"SWRW"
WGTS_VERSION = 1

_FILE_GROUPS = SurrogateWeights.GROUPS + ("norm_mean", "norm_scale")


def save_weights(path, w):
    out = [WGTS_MAGIC, struct.pack("<HII", WGTS_VERSION, w.kmax, w.width)]
    for name in _FILE_GROUPS:
        arr = getattr(w, name)
        out.append(struct.pack("<B", len(name)) + name.encode("ascii"))
        out.append(struct.pack("<Q", arr.size))
        if name in SurrogateWeights.COMPLEX_GROUPS:
            flat = np.empty(arr.size * 2, dtype="<f4")
            flat[0::2] = arr.real.ravel().astype("<f4")
            flat[1::2] = arr.imag.ravel().astype("<f4")
        else:
            flat = arr.ravel().astype("<f4")
        out.append(flat.tobytes())
    with open(path, "wb") as fh:
        fh.write(b"".join(out))


def load_weights(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 14 or raw[:4] != WGTS_MAGIC:
        raise FormatError("not a weights file (bad magic)")
    version, kmax, width = struct.unpack_from("<HII", raw, 4)
    if version != WGTS_VERSION:
        raise FormatError(f"unsupported weights version {version}")
    shapes = expected_shapes(kmax, width)

    fields = {}
    off = 14
    for expected in _FILE_GROUPS:
        if off >= len(raw):
            raise FormatError("truncated weights file")
        n = raw[off]
        off += 1
        name = raw[off:off + n].decode("ascii")
        off += n
        if name != expected:
            raise FormatError(f"group {name!r} out of order, expected {expected!r}")
        (count,) = struct.unpack_from("<Q", raw, off)
        off += 8
        shape = shapes[name]
        if count != int(np.prod(shape)):
            raise FormatError(f"group {name!r} has {count} elements, "
                              f"expected {int(np.prod(shape))}")
        if name in SurrogateWeights.COMPLEX_GROUPS:
            nbytes = 8 * count
            if len(raw) < off + nbytes:
                raise FormatError("truncated weights payload")
            flat = np.frombuffer(raw, dtype="<f4", count=2 * count, offset=off)
            arr = (flat[0::2].astype(np.float64)
                   + 1j * flat[1::2].astype(np.float64)).reshape(shape)
        else:
            nbytes = 4 * count
            if len(raw) < off + nbytes:
                raise FormatError("truncated weights payload")
            arr = np.frombuffer(raw, dtype="<f4", count=count,
                                offset=off).astype(np.float64).reshape(shape)
        fields[name] = arr
        off += nbytes
    if off != len(raw):
        raise FormatError("trailing bytes after last weights group")
    return SurrogateWeights(kmax=kmax, width=width, **fields)
