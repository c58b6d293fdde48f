"""Large-scale-CSI interference coordination for dense mmWave networks."""

__version__ = "0.1.0"
