"""fggm-lab: DRL user scheduling and falsified-CSI attacks on it."""

__version__ = "0.1.0"
