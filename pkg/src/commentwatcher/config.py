"""Flat key=value configuration with environment overrides.

An env var COMMENTWATCHER_FETCH_MIN_DELAY_MS overrides the file key
fetch.min_delay_ms, and so on (dots become underscores).
"""
from __future__ import annotations

import os
from pathlib import Path
from typing import Optional

DEFAULTS = {
    "store.root": "./data/store",
    "definitions.dir": "./definitions",
    "fixtures.dir": "./fixtures",
    "fetch.min_delay_ms": "1000",
    "fetch.timeout_ms": "20000",
    "fetch.max_retries": "2",
    "fetch.max_pages_per_thread": "50",
    "fetch.user_agent": "commentwatcher/0.1",
    "search.provider": "fixture",
    "search.endpoint": "",
    "search.api_key_env": "COMMENTWATCHER_SEARCH_API_KEY",
    "search.fixture_file": "./fixtures/search_results.txt",
    "ui.dist_dir": "./frontend/dist",
    "server.host": "127.0.0.1",
    "server.port": "8765",
    "server.workers": "2",
}

_ENV_PREFIX = "COMMENTWATCHER_"


class Config:
    def __init__(self, values: Optional[dict[str, str]] = None):
        self.values = dict(DEFAULTS)
        if values:
            self.values.update(values)
        for key in list(self.values):
            env_name = _ENV_PREFIX + key.upper().replace(".", "_")
            if env_name in os.environ:
                self.values[key] = os.environ[env_name]

    @classmethod
    def load(cls, path: Optional[str | Path] = None) -> "Config":
        values: dict[str, str] = {}
        if path is not None:
            for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ValueError(f"{path}:{lineno}: expected 'key = value'")
                key, _, value = line.partition("=")
                values[key.strip()] = value.strip()
        return cls(values)

    def get(self, key: str) -> str:
        return self.values[key]

    def get_int(self, key: str) -> int:
        return int(self.values[key])
