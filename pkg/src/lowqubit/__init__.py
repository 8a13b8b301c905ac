"""Low-qubit quantum circuit layers with a built-in differentiable simulator."""

__version__ = "0.1.0"
