"""Run the server: python -m policy_server --table table.json [--port N]."""

import argparse

import uvicorn

from .app import create_app
from .config import ServerConfig


def main():
    parser = argparse.ArgumentParser(prog="policy_server")
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--table", help="policy table JSON")
    parser.add_argument("--host", default=None)
    parser.add_argument("--port", type=int, default=None)
    args = parser.parse_args()

    if args.config:
        config = ServerConfig.from_file(args.config)
        if args.host:
            config.host = args.host
        if args.port:
            config.port = args.port
    else:
        config = ServerConfig(
            host=args.host or "127.0.0.1",
            port=args.port or 8123,
            table_path=args.table,
        )
    uvicorn.run(create_app(config), host=config.host, port=config.port,
                log_level="warning")


if __name__ == "__main__":
    main()
