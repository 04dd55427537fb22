"""Run outputs: one CSV per statistic plus a key-value manifest.

Byte determinism is the contract: the same spec and seed must reproduce
every output file exactly, so floats are serialized with repr (shortest
round-trip form) and rows are written in fixed replica-index order.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field

from .. import __version__
from .config import ExperimentSpec


def _cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, bool):
        return "1" if v else "0"
    return str(v)


def csv_bytes(header, rows) -> bytes:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_cell(v) for v in row))
    return ("\n".join(lines) + "\n").encode()


@dataclass
class RunManifest:
    spec: ExperimentSpec
    version: str = __version__
    files: dict = field(default_factory=dict)     # name -> sha256 hex
    summary: dict = field(default_factory=dict)   # key -> value (str)

    def add_file(self, out_dir: str, name: str, header, rows) -> str:
        """Write one CSV statistic file; record its digest; return its path."""
        data = csv_bytes(header, rows)
        self.files[name] = hashlib.sha256(data).hexdigest()
        path = os.path.join(out_dir, name)
        with open(path, "wb") as fh:
            fh.write(data)
        return path

    def note(self, key: str, value) -> None:
        self.summary[str(key)] = _cell(value)

    def text(self) -> str:
        lines = ["[spec]"]
        lines.extend(self.spec.canonical_text().rstrip("\n").split("\n"))
        lines.append(f"spec_hash = {self.spec.spec_hash()}")
        lines.append("")
        lines.append("[run]")
        lines.append(f"version = {self.version}")
        lines.append("")
        lines.append("[files]")
        for name in sorted(self.files):
            lines.append(f"{name} = sha256:{self.files[name]}")
        lines.append("")
        lines.append("[summary]")
        for key in sorted(self.summary):
            lines.append(f"{key} = {self.summary[key]}")
        return "\n".join(lines) + "\n"

    def write(self, out_dir: str) -> str:
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, "manifest.txt")
        with open(path, "w") as fh:
            fh.write(self.text())
        return path


def ensure_out_dir(spec: ExperimentSpec) -> str | None:
    if spec.out_dir is None:
        return None
    os.makedirs(spec.out_dir, exist_ok=True)
    return spec.out_dir
