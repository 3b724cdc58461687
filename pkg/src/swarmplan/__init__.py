"""Consensus-swarm SE(3) trajectory planning plus a drone ground station."""

__version__ = "0.1.0"
