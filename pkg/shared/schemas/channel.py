"""
Channel schemas.

Physical-layer parameters of the synthetic multi-user downlink.
"""

from pydantic import BaseModel, ConfigDict, Field


class ChannelConfig(BaseModel):
    """
    Gauss-Markov Rayleigh channel parameters.

    The Doppler coefficient is the per-slot correlation of every channel
    entry; 0.99 approximates slow pedestrian fading at 1 ms slots.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    num_antennas: int = Field(default=4, ge=1, description="Base-station antennas M")
    num_users: int = Field(default=8, ge=1, description="Single-antenna users L")
    noise_variance: float = Field(default=1.0, gt=0.0, description="Noise power sigma^2 (linear)")
    tx_power: float = Field(default=10.0, gt=0.0, description="Transmit power P per stream (linear)")
    doppler: float = Field(default=0.99, ge=0.0, lt=1.0, description="Slot-to-slot correlation rho")
    seed: int = Field(default=0, ge=0, lt=2**64, description="Trace seed")
