"""Exact Kochen-Specker prover and small quantum-operation simulator."""

__version__ = "0.1.0"
