"""Canonical JSON serialization shared by the CLI exporters and the HTTP service.

Every exported artifact is rendered through `canonical_bytes` so that a file
written by the CLI and a response body served over HTTP are byte-identical
for the same payload.
"""
from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any


def canonical_bytes(payload: Any) -> bytes:
    """Render a payload as canonical UTF-8 JSON bytes (sorted keys, 2-space indent)."""
    return (json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def write_canonical(path: Path, payload: Any) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(canonical_bytes(payload))


def read_json(path: Path) -> Any:
    with open(path, encoding="utf-8") as handle:
        return json.load(handle)


def fingerprint(payload: Any) -> str:
    """Stable sha256 hex digest of a payload's canonical form."""
    return hashlib.sha256(canonical_bytes(payload)).hexdigest()


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()
