"""The shipped surfaces and a loader that accepts a corpus name or a file path."""

from importlib import resources
from pathlib import Path

from .surface import Triangulation, parse_surface

CORPUS = ("punctured_torus", "sphere_3", "sphere_4", "genus2_1")


def load_surface(name_or_path) -> Triangulation:
    """Load a corpus surface by name, or parse a surface document file."""
    if str(name_or_path) in CORPUS:
        text = resources.files("simpcoord").joinpath(f"data/{name_or_path}.json").read_text()
    else:
        text = Path(name_or_path).read_text()
    return parse_surface(text)


def corpus() -> list[Triangulation]:
    return [load_surface(n) for n in CORPUS]
