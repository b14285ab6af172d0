"""Small networks shipped with the package, handy for demos and tests."""

from __future__ import annotations

from importlib.resources import files

from .inp import parse_inp
from .network import Network

__all__ = ["data_path", "toy9_path", "series1_path", "pumpnet_path",
           "load_toy9", "load_series1", "load_pumpnet"]


def data_path(name: str) -> str:
    return str(files("wdnflow").joinpath("data", name))


def toy9_path() -> str:
    """Nine nodes, ten pipes, two loops, diurnal demand pattern."""
    return data_path("toy9.inp")


def series1_path() -> str:
    """One reservoir, one pipe, one junction; single snapshot horizon."""
    return data_path("series1.inp")


def pumpnet_path() -> str:
    """Reservoir, single-point pump curve, two junctions and a tank."""
    return data_path("pumpnet.inp")


def _load(path: str) -> Network:
    with open(path, encoding="utf-8") as fh:
        return parse_inp(fh.read())


def load_toy9() -> Network:
    return _load(toy9_path())


def load_series1() -> Network:
    return _load(series1_path())


def load_pumpnet() -> Network:
    return _load(pumpnet_path())
