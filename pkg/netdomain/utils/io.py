"""
File output helpers.

Every write goes to a temporary file in the target directory and is renamed
into place, so readers never see half-written artifacts.
"""
import hashlib
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable

import pandas as pd
from pydantic import BaseModel


def atomic_write_bytes(path: str | Path, data: bytes) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def atomic_write_text(path: str | Path, text: str) -> Path:
    return atomic_write_bytes(path, text.encode("utf-8"))


def to_jsonable(obj: Any) -> Any:
    if isinstance(obj, BaseModel):
        return obj.model_dump(mode="json")
    return obj


def dumps_json(obj: Any) -> str:
    """UTF-8 JSON with sorted keys and a trailing newline."""
    return json.dumps(to_jsonable(obj), sort_keys=True, ensure_ascii=False, indent=2) + "\n"


def write_json(path: str | Path, obj: Any) -> Path:
    return atomic_write_text(path, dumps_json(obj))


def read_json(path: str | Path) -> Any:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def write_csv(path: str | Path, frame: pd.DataFrame, index: bool = False) -> Path:
    """RFC-4180 quoting (minimal, doubled quotes); missing values become empty cells."""
    text = frame.to_csv(index=index, na_rep="", lineterminator="\n")
    return atomic_write_text(path, text)


def file_digest(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def files_digest(root: str | Path, paths: Iterable[str | Path]) -> str:
    """Digest over (path relative to root, content digest) pairs, order-independent."""
    root = Path(root).resolve()
    entries = sorted(
        (Path(p).resolve().relative_to(root).as_posix(), file_digest(p)) for p in paths
    )
    h = hashlib.sha256()
    for rel, digest in entries:
        h.update(f"{rel}\0{digest}\n".encode("utf-8"))
    return h.hexdigest()


def text_digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()
