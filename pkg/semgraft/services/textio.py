"""Line-oriented UTF-8 file helpers shared by the stages."""

from pathlib import Path
from typing import Iterable, List, Union

PathLike = Union[str, Path]


def read_lines(path: PathLike) -> List[str]:
    with open(path, encoding="utf-8") as f:
        return [line.rstrip("\n") for line in f]


def write_lines(path: PathLike, lines: Iterable[str]):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for line in lines:
            f.write(line + "\n")
