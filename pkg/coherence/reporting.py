"""Run directories, CSV/JSON writers and the run manifest."""
import csv
import hashlib
import json
import logging
import platform
import time
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path
from typing import Any

from pydantic import BaseModel

from coherence import __version__

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


class OutputFile(BaseModel):
    path: str
    sha256: str
    kind: str


class RunManifest(BaseModel):
    """Everything needed to audit and repeat one command invocation."""

    command: str
    arguments: dict[str, Any]
    config: dict[str, Any]
    seed: int | None
    versions: dict[str, str]
    outputs: list[OutputFile]
    started_at: str
    wall_clock_seconds: float


def _package_version(name: str) -> str:
    try:
        return metadata.version(name)
    except metadata.PackageNotFoundError:
        return "unknown"


def artifact_versions() -> dict[str, str]:
    return {
        "coherence": __version__,
        "python": platform.python_version(),
        "numpy": _package_version("numpy"),
        "scipy": _package_version("scipy"),
        "pydantic": _package_version("pydantic"),
    }


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def read_csv(path: Path) -> list[dict[str, str]]:
    """Read a CSV written by ``RunDirectory.write_csv``."""
    with open(path, newline="", encoding="utf-8") as handle:
        return list(csv.DictReader(handle))


class RunDirectory:
    """One output directory per command invocation, closed by a manifest."""

    def __init__(self, root: Path, command: str, arguments: dict[str, Any], config: dict[str, Any] | None = None, seed: int | None = None):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.command = command
        self.arguments = arguments
        self.config = config or {}
        self.seed = seed
        self.outputs: list[OutputFile] = []
        self._started = time.perf_counter()
        self._started_at = datetime.now(timezone.utc).isoformat(timespec="seconds")
        logger.info(f"Writing {command} outputs to {self.root}")

    @staticmethod
    def default_root(output_dir: Path, command: str) -> Path:
        stamp = datetime.now().strftime("%Y%m%d-%H%M%S")
        return Path(output_dir) / f"{command}-{stamp}"

    def path(self, name: str) -> Path:
        target = self.root / name
        target.parent.mkdir(parents=True, exist_ok=True)
        return target

    def register(self, target: Path, kind: str) -> Path:
        self.outputs.append(OutputFile(path=str(target.relative_to(self.root)), sha256=_sha256(target), kind=kind))
        logger.debug(f"Wrote {target}")
        return target

    def write_csv(self, name: str, rows: list[dict[str, Any]], fieldnames: list[str] | None = None) -> Path:
        """Write ``rows`` with a header; column order follows ``fieldnames`` or the first row."""
        target = self.path(name)
        fieldnames = fieldnames or (list(rows[0].keys()) if rows else [])
        with open(target, "w", newline="", encoding="utf-8") as handle:
            writer = csv.DictWriter(handle, fieldnames=fieldnames, lineterminator="\n")
            writer.writeheader()
            for row in rows:
                writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
        return self.register(target, "csv")

    def write_json(self, name: str, payload: BaseModel | dict | list) -> Path:
        target = self.path(name)
        if isinstance(payload, BaseModel):
            text = payload.model_dump_json(indent=2)
        else:
            text = json.dumps(payload, indent=2, default=_json_default)
        target.write_text(text + "\n", encoding="utf-8")
        return self.register(target, "json")

    def finalize(self) -> RunManifest:
        """Write manifest.json listing every emitted file."""
        manifest = RunManifest(
            command=self.command,
            arguments=self.arguments,
            config=self.config,
            seed=self.seed,
            versions=artifact_versions(),
            outputs=list(self.outputs),
            started_at=self._started_at,
            wall_clock_seconds=round(time.perf_counter() - self._started, 3),
        )
        (self.root / MANIFEST_NAME).write_text(manifest.model_dump_json(indent=2) + "\n", encoding="utf-8")
        logger.info(f"{self.command}: {len(self.outputs)} files listed in {self.root / MANIFEST_NAME}")
        return manifest


def _json_default(value: Any) -> Any:
    if isinstance(value, BaseModel):
        return value.model_dump()
    if hasattr(value, "tolist"):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Cannot serialize {type(value).__name__}")
