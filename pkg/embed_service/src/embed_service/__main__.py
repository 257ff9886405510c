import argparse

import uvicorn

from .app import create_app
from .config import ServiceConfig


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="embed-service",
                                     description="serve sentence embeddings over HTTP")
    parser.add_argument("--model", default="hash:256",
                        help="hash:<dim> or a sentence-transformers model id")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8901)
    parser.add_argument("--max-batch", type=int, default=64)
    args = parser.parse_args(argv)
    config = ServiceConfig(model=args.model, host=args.host, port=args.port,
                           max_batch=args.max_batch)
    uvicorn.run(create_app(config), host=config.host, port=config.port)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
