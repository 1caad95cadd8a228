"""Compressive-sensing broadband channel estimation for IRS-aided mmWave massive MIMO."""
from .config import SystemConfig, load_config, make_config
from .recovery import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "SystemConfig", "load_config", "make_config", "__version__"]
