"""
Multi-user downlink channel.

Correlated Rayleigh CSI traces, zero-forcing beamforming and achievable
rates.
"""

from shared.schemas.channel import ChannelConfig

from .beamforming import (
    CONDITION_THRESHOLD,
    SingularChannelError,
    batched_zf_rates,
    correlation_matrix,
    matched_filter_rates,
    max_rates,
    single_user_max_rate,
    sinr_and_rates,
    zf_beamformer,
)
from .fading import (
    ChannelConfigError,
    ChannelState,
    TraceFormatError,
    channel_config_from_dict,
    channel_state,
    export_trace,
    generate_csi_trace,
    load_trace,
)

__all__ = [
    "ChannelConfig",
    "CONDITION_THRESHOLD",
    "SingularChannelError",
    "batched_zf_rates",
    "correlation_matrix",
    "matched_filter_rates",
    "max_rates",
    "single_user_max_rate",
    "sinr_and_rates",
    "zf_beamformer",
    "ChannelConfigError",
    "ChannelState",
    "TraceFormatError",
    "channel_config_from_dict",
    "channel_state",
    "export_trace",
    "generate_csi_trace",
    "load_trace",
]
