"""Desk-scale UAV ground-control simulation suite.

Subsystems: WGS84/ENU geodesy, terrain height fields, a deterministic
quadrotor simulator, virtual-ball velocity control, waypoint missions,
spatial-overlay geometry, a compact binary telemetry protocol, and
flight-log scoring/analytics, served over a FastAPI WebSocket/REST surface.
"""

__version__ = "0.1.0"
