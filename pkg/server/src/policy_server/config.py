"""Server configuration: exactly one backend (table file or model)."""

from __future__ import annotations

import json
from dataclasses import dataclass


class ConfigError(ValueError):
    pass


@dataclass
class ServerConfig:
    host: str = "127.0.0.1"
    port: int = 8123
    table_path: str | None = None
    model_path: str | None = None
    default_k: int = 10
    default_n_samples: int = 10

    def __post_init__(self):
        backends = [p for p in (self.table_path, self.model_path) if p]
        if len(backends) != 1:
            raise ConfigError("configure exactly one backend: table or model")
        if self.default_k < 1 or self.default_n_samples < 1:
            raise ConfigError("default_k and default_n_samples must be >= 1")

    @classmethod
    def from_file(cls, path) -> "ServerConfig":
        with open(path) as fh:
            data = json.load(fh)
        backend = data.get("backend", {})
        return cls(
            host=data.get("host", "127.0.0.1"),
            port=int(data.get("port", 8123)),
            table_path=backend.get("table"),
            model_path=backend.get("model"),
            default_k=int(data.get("default_k", 10)),
            default_n_samples=int(data.get("default_n_samples", 10)),
        )
