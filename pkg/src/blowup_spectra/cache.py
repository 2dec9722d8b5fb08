"""Content-addressed on-disk cache of run reports.

Keys are SHA-256 digests of (command, config, tool version), so a version bump
misses every old entry. Writes go to a temporary file in the cache directory and
are moved into place with os.replace, which is atomic on POSIX.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path

from . import __version__
from .errors import CacheCorruptionError
from .report import Report, _encode

ENV_VAR = "BLOWUP_SPECTRA_CACHE"


def default_dir() -> Path:
    env = os.environ.get(ENV_VAR)
    if env:
        return Path(env)
    base = os.environ.get("XDG_CACHE_HOME") or Path.home() / ".cache"
    return Path(base) / "blowup_spectra"


def cache_key(command: str, config: dict, version: str = __version__) -> str:
    blob = json.dumps([command, _encode(config), version], sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


class Cache:
    def __init__(self, directory=None):
        self.dir = Path(directory) if directory is not None else default_dir()

    def _path(self, key):
        return self.dir / f"{key}.json"

    def put(self, report: Report) -> str:
        key = cache_key(report.command, report.inputs, report.tool_version)
        self.dir.mkdir(parents=True, exist_ok=True)
        payload = json.dumps({"key": key, "report": json.loads(report.to_json())}, sort_keys=True)
        fd, tmp = tempfile.mkstemp(dir=self.dir, prefix=".tmp-", suffix=".json")
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(payload)
            os.replace(tmp, self._path(key))
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        return key

    def get(self, key: str) -> Report | None:
        path = self._path(key)
        if not path.exists():
            return None
        text = path.read_text()
        try:
            data = json.loads(text)
            stored = data["key"]
            report = Report.from_json(json.dumps(data["report"]))
        except (ValueError, KeyError, TypeError) as exc:
            raise CacheCorruptionError(f"cache entry {path} is unreadable: {exc}") from exc
        if stored != key:
            raise CacheCorruptionError(f"cache entry {path} carries key {stored}")
        return report

    def lookup(self, command: str, config: dict) -> Report | None:
        return self.get(cache_key(command, config))

    def entries(self):
        """Readable reports written by this tool version, sorted by command."""
        if not self.dir.exists():
            return []
        out = [self.get(p.stem) for p in sorted(self.dir.glob("*.json"))]
        fresh = (r for r in out if r is not None and r.tool_version == __version__)
        return sorted(fresh, key=lambda r: r.command)
