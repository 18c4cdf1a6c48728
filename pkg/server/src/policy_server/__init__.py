"""Reference HTTP server for the retrosynthesis policy wire protocol."""

from .app import create_app
from .config import ServerConfig
from .table import TableBackend

__all__ = ["create_app", "ServerConfig", "TableBackend"]
