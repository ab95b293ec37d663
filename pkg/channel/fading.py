"""
Correlated fading traces.

First-order Gauss-Markov Rayleigh model:

    H[t+1] = rho * H[t] + sqrt(1 - rho^2) * G[t],   G[t] ~ CN(0, 1) i.i.d.

Each entry of every H is marginally CN(0, 1) and consecutive slots correlate
with coefficient rho. Traces can be exported to and read back from the
"CSIT" binary format so several runs can share one trace.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Sequence
import logging
import struct

import numpy as np
from pydantic import ValidationError

from shared.schemas.channel import ChannelConfig
from .beamforming import max_rates


logger = logging.getLogger(__name__)

TRACE_MAGIC = b"CSIT"
TRACE_VERSION = 1
_TRACE_HEADER = struct.Struct("<4sIIII")


class ChannelConfigError(ValueError):
    """Raised for channel parameters that violate the model's invariants."""
    pass


class TraceFormatError(Exception):
    """Raised when a CSIT file is malformed."""
    pass


@dataclass(frozen=True)
class ChannelState:
    """True CSI of one slot plus each user's single-user max rate."""

    slot: int
    true_csi: np.ndarray
    max_rates: np.ndarray

    @property
    def num_antennas(self) -> int:
        return self.true_csi.shape[0]

    @property
    def num_users(self) -> int:
        return self.true_csi.shape[1]


def channel_config_from_dict(data: Dict[str, Any]) -> ChannelConfig:
    """Validate a mapping into a ChannelConfig."""
    try:
        return ChannelConfig(**data)
    except ValidationError as e:
        raise ChannelConfigError(f"Invalid channel configuration: {e}") from e


def complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    """CN(0, 1) samples: unit total variance split across real and imaginary parts."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def channel_state(slot: int, csi: np.ndarray, tx_power: float, noise_variance: float) -> ChannelState:
    csi = np.asarray(csi, dtype=np.complex128)
    if not np.all(np.isfinite(csi)):
        raise ChannelConfigError(f"Slot {slot}: CSI has non-finite entries")
    return ChannelState(slot=slot, true_csi=csi, max_rates=max_rates(csi, tx_power, noise_variance))


def generate_csi_trace(config: ChannelConfig, num_slots: int) -> List[ChannelState]:
    """Deterministic trace of ``num_slots`` slots for ``config.seed``."""
    if num_slots < 1:
        raise ChannelConfigError(f"num_slots must be >= 1, got {num_slots}")
    if not isinstance(config, ChannelConfig):
        config = channel_config_from_dict(dict(config))

    rng = np.random.default_rng(config.seed)
    shape = (config.num_antennas, config.num_users)
    rho = config.doppler
    innovation = np.sqrt(1.0 - rho * rho)

    h = complex_gaussian(rng, shape)
    trace = []
    for t in range(num_slots):
        if t > 0:
            h = rho * h + innovation * complex_gaussian(rng, shape)
        trace.append(channel_state(t, h, config.tx_power, config.noise_variance))

    logger.debug(
        f"Generated {num_slots}-slot trace (M={config.num_antennas}, "
        f"L={config.num_users}, rho={rho}, seed={config.seed})"
    )
    return trace


def export_trace(trace: Sequence[ChannelState], path: Path) -> Path:
    """Write a trace as CSIT: header then row-major interleaved re/im float64."""
    if not trace:
        raise TraceFormatError("Cannot export an empty trace")
    m, l = trace[0].true_csi.shape
    chunks = [_TRACE_HEADER.pack(TRACE_MAGIC, TRACE_VERSION, m, l, len(trace))]
    for state in trace:
        if state.true_csi.shape != (m, l):
            raise TraceFormatError(f"Slot {state.slot} has shape {state.true_csi.shape}, expected {(m, l)}")
        interleaved = np.stack([state.true_csi.real, state.true_csi.imag], axis=-1)
        chunks.append(np.ascontiguousarray(interleaved, dtype="<f8").tobytes())
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(b"".join(chunks))
    logger.info(f"Exported {len(trace)} slots to {path}")
    return path


def load_trace(path: Path, tx_power: float, noise_variance: float) -> List[ChannelState]:
    """Read a CSIT file back into channel states."""
    data = Path(path).read_bytes()
    if len(data) < _TRACE_HEADER.size:
        raise TraceFormatError(f"{path}: too short for a CSIT header")
    magic, version, m, l, num_slots = _TRACE_HEADER.unpack_from(data, 0)
    if magic != TRACE_MAGIC:
        raise TraceFormatError(f"{path}: bad magic {magic!r}")
    if version != TRACE_VERSION:
        raise TraceFormatError(f"{path}: unsupported version {version}")
    expected = _TRACE_HEADER.size + num_slots * m * l * 2 * 8
    if len(data) != expected:
        raise TraceFormatError(f"{path}: expected {expected} bytes, found {len(data)}")

    raw = np.frombuffer(data, dtype="<f8", offset=_TRACE_HEADER.size)
    raw = raw.reshape(num_slots, m, l, 2)
    csi = raw[..., 0] + 1j * raw[..., 1]
    return [channel_state(t, csi[t], tx_power, noise_variance) for t in range(num_slots)]
