"""Shared plumbing: build a dataclass config from command-line overrides."""

from __future__ import annotations

import argparse
import dataclasses


def parse_config(cls, description: str):
    """Expose every field of the dataclass ``cls`` as an optional ``--field`` flag."""
    parser = argparse.ArgumentParser(description=description)
    for f in dataclasses.fields(cls):
        default = f.default if f.default is not dataclasses.MISSING else f.default_factory()
        kind = type(default)
        if kind is tuple:
            parser.add_argument(f"--{f.name}", type=float, nargs="+", default=default)
        else:
            parser.add_argument(f"--{f.name}", type=kind, default=default)
    args = vars(parser.parse_args())
    return cls(**{k: tuple(v) if isinstance(v, list) else v for k, v in args.items()})
