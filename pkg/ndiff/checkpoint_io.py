"""
Binary weight files.

Layout:
    magic "FGGM" | version u32 | header length u32 | JSON header | f64 payload

The JSON header lists every network (name, layer dims, output activation),
the normalizer shape and sample count, and a free-form ``meta`` mapping. The
payload stores, in header order, each network's W/b arrays followed by the
normalizer mean and m2 vectors, all little-endian float64.
"""

from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple
import json
import logging
import struct

import numpy as np

from mdp.normalizer import NormalizerState
from .mlp import MlpParams


logger = logging.getLogger(__name__)

MAGIC = b"FGGM"
VERSION = 1
_PREFIX = struct.Struct("<4sII")


class CheckpointFormatError(Exception):
    """Raised when a weight file is truncated or has the wrong magic/version."""
    pass


def save_weights(
    networks: Mapping[str, MlpParams],
    normalizer: Optional[NormalizerState],
    path: Path,
    meta: Optional[Dict[str, Any]] = None,
) -> Path:
    """Write ``networks`` and ``normalizer`` to ``path``."""
    path = Path(path)
    header: Dict[str, Any] = {
        "networks": [
            {"name": name, "dims": params.dims, "output_activation": params.output_activation}
            for name, params in networks.items()
        ],
        "normalizer": None if normalizer is None else {
            "count": int(normalizer.count),
            "dim": int(normalizer.mean.shape[0]),
        },
        "meta": meta or {},
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")

    chunks: List[bytes] = [_PREFIX.pack(MAGIC, VERSION, len(header_bytes)), header_bytes]
    for params in networks.values():
        for arr in params.arrays():
            chunks.append(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    if normalizer is not None:
        chunks.append(np.ascontiguousarray(normalizer.mean, dtype="<f8").tobytes())
        chunks.append(np.ascontiguousarray(normalizer.m2, dtype="<f8").tobytes())

    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(b"".join(chunks))
    logger.info(f"Saved {len(networks)} network(s) to {path}")
    return path


def load_weights(
    path: Path,
) -> Tuple[Dict[str, MlpParams], Optional[NormalizerState], Dict[str, Any]]:
    """Read a file written by ``save_weights``."""
    data = Path(path).read_bytes()
    if len(data) < _PREFIX.size:
        raise CheckpointFormatError(f"{path}: file too short for header")
    magic, version, header_len = _PREFIX.unpack_from(data, 0)
    if magic != MAGIC:
        raise CheckpointFormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise CheckpointFormatError(f"{path}: unsupported version {version}")
    offset = _PREFIX.size
    if len(data) < offset + header_len:
        raise CheckpointFormatError(f"{path}: truncated header")
    try:
        header = json.loads(data[offset:offset + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointFormatError(f"{path}: unreadable header: {e}") from e
    offset += header_len

    def read(shape: Tuple[int, ...]) -> np.ndarray:
        nonlocal offset
        count = int(np.prod(shape))
        end = offset + 8 * count
        if end > len(data):
            raise CheckpointFormatError(f"{path}: truncated payload")
        arr = np.frombuffer(data, dtype="<f8", count=count, offset=offset).reshape(shape)
        offset = end
        return arr.astype(np.float64)

    networks: Dict[str, MlpParams] = {}
    for entry in header["networks"]:
        dims = entry["dims"]
        arrays = []
        for fan_in, fan_out in zip(dims[:-1], dims[1:]):
            arrays.append(read((fan_out, fan_in)))
            arrays.append(read((fan_out,)))
        networks[entry["name"]] = MlpParams.from_arrays(arrays, entry["output_activation"])

    normalizer = None
    if header["normalizer"] is not None:
        dim = header["normalizer"]["dim"]
        mean = read((dim,))
        m2 = read((dim,))
        normalizer = NormalizerState(count=header["normalizer"]["count"], mean=mean, m2=m2)

    if offset != len(data):
        raise CheckpointFormatError(f"{path}: {len(data) - offset} trailing bytes")
    return networks, normalizer, header["meta"]
