"""Experiment configurations used by the runner scripts."""
from __future__ import annotations

import argparse
from dataclasses import dataclass, field, fields
from typing import List, Type, TypeVar

T = TypeVar("T")


@dataclass
class CatalogConfig:
    n: int = 2
    conjugates: int = 200
    seed: int = 20240601


@dataclass
class C1Config:
    cases: int = 50
    degree: int = 8
    max_data_degree: int = 6
    seed: int = 20240604


@dataclass
class AutomorphismConfig:
    cases: int = 50
    degree: int = 10
    seed: int = 20240606


@dataclass
class PipelineConfig:
    weight: int = 9
    seeds: List[str] = field(default_factory=lambda: [
        "zb^2", "(zb*xi + zb^2)*(zb + xi/2)", "(1 + xi)*(zb*xi + zb^2)*(zb + xi/2)",
        "z*(zb*xi + zb^2)*(zb + xi/2)"])


def from_args(cls: Type[T], argv=None) -> T:
    """Build a config from command-line flags named after its int fields."""
    parser = argparse.ArgumentParser(description=cls.__doc__)
    for f in fields(cls):
        if f.type in (int, "int"):
            parser.add_argument(f"--{f.name.replace('_', '-')}", type=int, default=None)
    ns = parser.parse_args(argv)
    kwargs = {k: v for k, v in vars(ns).items() if v is not None}
    return cls(**kwargs)
