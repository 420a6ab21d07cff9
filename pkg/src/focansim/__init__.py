"""Discrete-event simulator of a fog-supported smart-city network.

Models things, fog nodes (FNs), the three communication classes
(interprimary, primary, secondary), hop routing with TDMA scheduling,
and CPU/network energy accounting, plus a single-hop D2D comparison
baseline.
"""

__version__ = "0.1.0"

PLATFORM_FOCAN = "focan"
PLATFORM_D2D = "d2d"
