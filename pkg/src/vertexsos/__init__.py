"""Vertex models, universal R-matrix factors, q-oscillator transfer products
and vertex-to-SOS intertwiners, with a reproducible command-line harness."""

__version__ = "0.1.0"
