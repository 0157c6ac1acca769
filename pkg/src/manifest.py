"""
Run manifests and the on-disk correlator cache.

Every command writes a ``manifest.json`` describing how its outputs were
produced; re-running the recorded argv reproduces the outputs byte for byte.
Cached correlators are stored one JSON file per (curve, g, n, mode) key.
"""

import hashlib
import json
import logging
import os
import tempfile
import threading
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

logging.basicConfig(
    level=logging.INFO, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s"
)
logger = logging.getLogger(__name__)

# Bump when the correlator JSON layout changes; old entries are then ignored.
FORMAT_VERSION = 1
CACHE_ENV_VAR = "TR_CACHE_DIR"
DEFAULT_CACHE_DIR = ".tr_cache"


def write_json(data: Any, path: Path) -> None:
    """
    Write JSON deterministically (sorted keys, two-space indent, trailing newline).

    Args:
        data: JSON-serialisable data.
        path: Destination; parent directories are created.
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, sort_keys=True, ensure_ascii=False)
        f.write("\n")


@dataclass
class RunManifest:
    """
    Record of one CLI invocation.

    Attributes:
        command: Sub-command name.
        argv: Full argument vector, replayable through ``cli.main``.
        curve_hash: SHA-256 of the canonical curve data, if a curve was used.
        parameters: Truncation and mode parameters.
        outputs: Paths of every file written.
        timings: Wall-clock seconds per stage.
        cache_hits: Number of correlators read from the cache.
        format_version: Cache and JSON format version.
    """

    command: str
    argv: List[str] = field(default_factory=list)
    curve_hash: Optional[str] = None
    parameters: Dict[str, Any] = field(default_factory=dict)
    outputs: List[str] = field(default_factory=list)
    timings: Dict[str, float] = field(default_factory=dict)
    cache_hits: int = 0
    format_version: int = FORMAT_VERSION

    def to_json(self, path: Path) -> None:
        """
        Save the manifest as a JSON file.

        Args:
            path: Path where the JSON file should be saved.
        """
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(asdict(self), f, indent=2)

    @classmethod
    def from_json(cls, path: Path) -> "RunManifest":
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
        return cls(**data)


def resolve_cache_dir(explicit: Optional[str]) -> Path:
    """``--cache-dir`` if given, else $TR_CACHE_DIR, else ./.tr_cache."""
    if explicit:
        return Path(explicit)
    env = os.environ.get(CACHE_ENV_VAR)
    if env:
        return Path(env)
    return Path(DEFAULT_CACHE_DIR)


class CorrelatorCache:
    """
    Directory of cached correlator JSON documents.

    Writes go to a temporary file in the cache directory and are renamed into
    place, so readers never observe a partial entry.
    """

    def __init__(self, directory: Path) -> None:
        self.directory = directory
        self.hits = 0
        self.misses = 0
        self._lock = threading.Lock()

    @staticmethod
    def key(curve_hash: str, g: int, n: int, mode: str) -> str:
        text = json.dumps(
            {"curve": curve_hash, "g": g, "n": n, "mode": mode, "version": FORMAT_VERSION},
            sort_keys=True,
        )
        return hashlib.sha256(text.encode("utf-8")).hexdigest()

    def _path(self, key: str) -> Path:
        return self.directory / key[:2] / f"{key}.json"

    def get(self, key: str) -> Optional[Dict[str, Any]]:
        path = self._path(key)
        if not path.exists():
            with self._lock:
                self.misses += 1
            return None
        try:
            with open(path, "r", encoding="utf-8") as f:
                entry = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            logger.warning(f"Ignoring unreadable cache entry {path}: {e}")
            with self._lock:
                self.misses += 1
            return None
        if entry.get("version") != FORMAT_VERSION:
            logger.debug(f"Cache entry {key} has stale format version")
            with self._lock:
                self.misses += 1
            return None
        with self._lock:
            self.hits += 1
        return entry["data"]

    def put(self, key: str, data: Dict[str, Any]) -> None:
        path = self._path(key)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, temp_name = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as f:
                json.dump({"version": FORMAT_VERSION, "data": data}, f, sort_keys=True)
            os.replace(temp_name, path)
        except OSError:
            logger.error(f"Failed to write cache entry {path}")
            if os.path.exists(temp_name):
                os.unlink(temp_name)
            raise
        logger.debug(f"Cached {key} at {path}")
