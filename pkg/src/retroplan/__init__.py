"""retroplan: template-based retrosynthesis planning and evaluation."""

__version__ = "0.1.0"
