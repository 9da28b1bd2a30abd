"""
Configuration module - Project configuration settings
"""

from .settings import OUTPUT_FORMATS, Settings

__all__ = [
    "Settings",
    "OUTPUT_FORMATS",
]
