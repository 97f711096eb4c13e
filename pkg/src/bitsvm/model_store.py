"""Bit-exact single-file serialization of an inference bundle.

Little-endian, fixed field order. All float parameters are 32-bit on disk
and float32-quantized in memory (see ModelBundle.build), so a round trip
reproduces predictions exactly. Arrays are stored explicitly rather than
re-derived from the seed, keeping files portable across RNG versions; the
seed and generator name are recorded for provenance only.

Layout:
  magic "BSVM", version u32, mode u32 (0 binary-pruned, 1 multiclass planes)
  d_raw u32, d_padded u32, p u32, class_count u32
  sigma f32, lambda f32, seed u64, rng name 8s
  label_map i32[class_count]
  scaler min f32[d_raw], max f32[d_raw]
  n_blocks u32, then per block:
    B as ceil(d/8) packed bytes, perm u32[d], G f32[d], S f32[d]
  b f32[p], t f32[p]
  n_models u32, alpha f32[n_models]
  mode 0: keep_mask ceil(p/8) bytes, len_active u32,
          sign plane ceil(len_active/8) bytes
  mode 1: per model: sign plane ceil(p/8) bytes, support plane ceil(p/8) bytes

Bit planes are LSB-first within bytes, matching the in-memory word layout.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Union

import numpy as np

from .dataio import Scaler
from .embedding import BitVector, EmbeddingParams
from .fastfood import RNG_NAME, FastfoodBlock, FastfoodTransform
from .inference import ModelBundle, PackedTernary, prune
from .ternary_trainer import TernaryModel

MAGIC = b"BSVM"
VERSION = 1


class ModelFormatError(ValueError):
    """Raised when a model file cannot be parsed."""


def _pack_plane(bits: np.ndarray) -> bytes:
    return np.packbits(np.asarray(bits, dtype=bool), bitorder="little").tobytes()


def _unpack_plane(raw: bytes, n: int) -> np.ndarray:
    bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")
    return bits[:n].astype(bool)


def serialize(bundle: ModelBundle) -> bytes:
    """Encode a bundle into the single-file format."""
    t = bundle.params.transform
    mode = 0 if bundle.is_binary else 1
    if mode == 1 and len(bundle.models) != bundle.class_count:
        raise ValueError("one-vs-all bundle must hold one model per class")
    if mode == 0 and bundle.class_count != 2:
        raise ValueError("binary bundle must have exactly two labels")
    out = bytearray()
    out += struct.pack(
        "<4sIIIIIIffQ8s",
        MAGIC,
        VERSION,
        mode,
        bundle.d_raw,
        t.d,
        t.p,
        bundle.class_count,
        np.float32(t.sigma),
        np.float32(bundle.lam),
        bundle.seed & 0xFFFFFFFFFFFFFFFF,
        RNG_NAME.encode().ljust(8, b"\x00"),
    )
    out += np.asarray(bundle.label_map, dtype="<i4").tobytes()
    out += np.asarray(bundle.scaler.lo, dtype="<f4").tobytes()
    out += np.asarray(bundle.scaler.hi, dtype="<f4").tobytes()
    out += struct.pack("<I", len(t.blocks))
    for blk in t.blocks:
        out += _pack_plane(blk.B > 0)
        out += np.asarray(blk.perm, dtype="<u4").tobytes()
        out += np.asarray(blk.G, dtype="<f4").tobytes()
        out += np.asarray(blk.S, dtype="<f4").tobytes()
    out += np.asarray(bundle.params.b, dtype="<f4").tobytes()
    out += np.asarray(bundle.params.t, dtype="<f4").tobytes()
    out += struct.pack("<I", len(bundle.models))
    out += np.asarray([m.alpha for m in bundle.models], dtype="<f4").tobytes()
    if mode == 0:
        pruned = prune(bundle.models[0])
        out += _pack_plane(pruned.keep_mask.to_bits())
        out += struct.pack("<I", pruned.len_active)
        out += _pack_plane(pruned.w_packed.to_bits())
    else:
        for m in bundle.models:
            pt = PackedTernary.from_ternary(m.w)
            out += _pack_plane(pt.wp.to_bits())
            out += _pack_plane(pt.ws.to_bits())
    return bytes(out)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.off = 0

    def take(self, nbytes: int, what: str) -> bytes:
        if self.off + nbytes > len(self.data):
            raise ModelFormatError(f"truncated file: needed {nbytes} bytes for {what} at offset {self.off}")
        chunk = self.data[self.off : self.off + nbytes]
        self.off += nbytes
        return chunk

    def unpack(self, fmt: str, what: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))

    def array(self, dtype: str, count: int, what: str) -> np.ndarray:
        item = np.dtype(dtype).itemsize
        return np.frombuffer(self.take(item * count, what), dtype=dtype).copy()


def deserialize(data: bytes) -> ModelBundle:
    """Decode bytes produced by :func:`serialize`."""
    r = _Reader(data)
    magic, version = r.unpack("<4sI", "header")
    if magic != MAGIC:
        raise ModelFormatError(f"bad magic {magic!r}: not a model file")
    if version != VERSION:
        raise ModelFormatError(f"unsupported version {version} (expected {VERSION})")
    mode, d_raw, d_padded, p, class_count = r.unpack("<IIIII", "header")
    if mode not in (0, 1):
        raise ModelFormatError(f"unknown mode {mode}")
    sigma, lam, seed, rng_name = r.unpack("<ffQ8s", "header")
    del rng_name  # provenance only
    label_map = r.array("<i4", class_count, "label map").astype(np.int64).tolist()
    lo = r.array("<f4", d_raw, "scaler min").astype(np.float64)
    hi = r.array("<f4", d_raw, "scaler max").astype(np.float64)
    (n_blocks,) = r.unpack("<I", "block count")
    blocks = []
    for i in range(n_blocks):
        b_bits = _unpack_plane(r.take(-(-d_padded // 8), f"block {i} signs"), d_padded)
        blocks.append(
            FastfoodBlock(
                B=np.where(b_bits, 1, -1).astype(np.int8),
                perm=r.array("<u4", d_padded, f"block {i} permutation").astype(np.int64),
                G=r.array("<f4", d_padded, f"block {i} gaussian"),
                S=r.array("<f4", d_padded, f"block {i} scaling"),
            )
        )
    transform = FastfoodTransform(blocks=blocks, d=d_padded, p=p, sigma=float(sigma), seed=int(seed))
    b = r.array("<f4", p, "phase dither")
    t = r.array("<f4", p, "threshold dither")
    params = EmbeddingParams(transform=transform, b=b, t=t)
    (n_models,) = r.unpack("<I", "model count")
    alphas = r.array("<f4", n_models, "alphas").astype(np.float64)
    models = []
    if mode == 0:
        if n_models != 1:
            raise ModelFormatError(f"binary file must hold 1 model, found {n_models}")
        keep = _unpack_plane(r.take(-(-p // 8), "keep mask"), p)
        (len_active,) = r.unpack("<I", "active length")
        if len_active != int(keep.sum()):
            raise ModelFormatError("active length does not match keep mask")
        signs = _unpack_plane(r.take(-(-len_active // 8), "sign plane"), len_active)
        w = np.zeros(p, dtype=np.int8)
        w[keep] = np.where(signs, 1, -1)
        models.append(TernaryModel(w=w, alpha=float(alphas[0]), lam=float(lam), class_id=0))
    else:
        if n_models != class_count:
            raise ModelFormatError(f"expected {class_count} models, found {n_models}")
        for k in range(n_models):
            wp = _unpack_plane(r.take(-(-p // 8), f"class {k} sign plane"), p)
            ws = _unpack_plane(r.take(-(-p // 8), f"class {k} support plane"), p)
            pt = PackedTernary(wp=BitVector.from_bits(wp), ws=BitVector.from_bits(ws))
            models.append(TernaryModel(w=pt.decode(), alpha=float(alphas[k]), lam=float(lam), class_id=k))
    if r.off != len(data):
        raise ModelFormatError(f"trailing bytes after offset {r.off}")
    return ModelBundle(
        scaler=Scaler(lo=lo, hi=hi),
        params=params,
        models=models,
        label_map=label_map,
        d_raw=int(d_raw),
        lam=float(lam),
        seed=int(seed),
    )


def save(bundle: ModelBundle, path: Union[str, Path]) -> int:
    """Write the bundle; returns the number of bytes written."""
    blob = serialize(bundle)
    Path(path).write_bytes(blob)
    return len(blob)


def load(path: Union[str, Path]) -> ModelBundle:
    """Read a bundle saved by :func:`save`."""
    return deserialize(Path(path).read_bytes())
