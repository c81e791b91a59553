"""Atom-mapping providers: file-backed, HTTP service, and a write-through cache.

The wire contract with the mapping service is a POST to /map with
{"reactions": [...]} answered by {"mapped": [...], "confidence": [...]},
order preserved.
"""

from __future__ import annotations

import csv
import json
import threading
import urllib.error
import urllib.request
from pathlib import Path
from typing import Iterable, Optional, Protocol, Sequence

HTTP_BATCH_SIZE = 32


class MappingError(RuntimeError):
    pass


class MappingProvider(Protocol):
    def map_reactions(self, reactions: Sequence[str]) -> list[str]: ...


class FileMappingProvider:
    """Serves atom-mapped reactions from a CSV with columns unmapped,mapped."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._table: dict[str, str] = {}
        if not self.path.exists():
            raise MappingError(f"mapping file not found: {self.path}")
        with self.path.open(newline="", encoding="utf-8") as handle:
            for row in csv.DictReader(handle):
                if row.get("unmapped") and row.get("mapped"):
                    self._table[row["unmapped"].strip()] = row["mapped"].strip()

    def map_reactions(self, reactions: Sequence[str]) -> list[str]:
        missing = [r for r in reactions if r not in self._table]
        if missing:
            raise MappingError(
                f"{self.path} has no mapping for {len(missing)} reaction(s), "
                f"first: {missing[0]!r}"
            )
        return [self._table[r] for r in reactions]


class HttpMappingProvider:
    """Client for the mapping microservice; batches requests."""

    def __init__(self, base_url: str, timeout: float = 60.0, batch_size: int = HTTP_BATCH_SIZE):
        base = base_url.rstrip("/")
        self.endpoint = base if base.endswith("/map") else base + "/map"
        self.timeout = timeout
        self.batch_size = batch_size
        self.last_confidences: list[float] = []

    def map_reactions(self, reactions: Sequence[str]) -> list[str]:
        mapped: list[str] = []
        confidences: list[float] = []
        for start in range(0, len(reactions), self.batch_size):
            batch = list(reactions[start : start + self.batch_size])
            body = json.dumps({"reactions": batch}).encode("utf-8")
            request = urllib.request.Request(
                self.endpoint, data=body, headers={"Content-Type": "application/json"}
            )
            try:
                with urllib.request.urlopen(request, timeout=self.timeout) as response:
                    payload = json.loads(response.read().decode("utf-8"))
            except urllib.error.HTTPError as exc:
                detail = exc.read().decode("utf-8", "replace")[:500]
                raise MappingError(
                    f"mapping service returned {exc.code} for batch of {len(batch)}: {detail}"
                ) from exc
            except (urllib.error.URLError, OSError) as exc:
                raise MappingError(f"mapping service unreachable at {self.endpoint}: {exc}") from exc
            got = payload.get("mapped")
            if not isinstance(got, list) or len(got) != len(batch):
                raise MappingError(
                    f"mapping service answered {0 if not isinstance(got, list) else len(got)} "
                    f"strings for a batch of {len(batch)}"
                )
            mapped.extend(got)
            confidences.extend(payload.get("confidence") or [float("nan")] * len(batch))
        self.last_confidences = confidences
        return mapped


class CachedMappingProvider:
    """Write-through cache keyed by the exact unmapped reaction string.

    The cache file shares the FileMappingProvider format, so a populated
    cache can later serve as an offline mapping file.
    """

    def __init__(self, inner: Optional[MappingProvider], cache_path: str | Path):
        self.inner = inner
        self.cache_path = Path(cache_path)
        self._lock = threading.Lock()
        self._table: dict[str, str] = {}
        if self.cache_path.exists():
            with self.cache_path.open(newline="", encoding="utf-8") as handle:
                for row in csv.DictReader(handle):
                    if row.get("unmapped") and row.get("mapped"):
                        self._table[row["unmapped"].strip()] = row["mapped"].strip()

    def map_reactions(self, reactions: Sequence[str]) -> list[str]:
        with self._lock:
            misses = sorted({r for r in reactions if r not in self._table})
        if misses:
            if self.inner is None:
                raise MappingError(
                    f"mapping cache {self.cache_path} lacks {len(misses)} reaction(s) "
                    "and no upstream provider is configured"
                )
            fresh = self.inner.map_reactions(misses)
            with self._lock:
                for unmapped, mapped in zip(misses, fresh):
                    self._table[unmapped] = mapped
                self._persist(zip(misses, fresh))
        with self._lock:
            return [self._table[r] for r in reactions]

    def _persist(self, pairs: Iterable[tuple[str, str]]) -> None:
        new_file = not self.cache_path.exists()
        self.cache_path.parent.mkdir(parents=True, exist_ok=True)
        with self.cache_path.open("a", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            if new_file:
                writer.writerow(["unmapped", "mapped"])
            for unmapped, mapped in pairs:
                writer.writerow([unmapped, mapped])


def provider_from_spec(spec: str, cache_path: Optional[str | Path] = None) -> MappingProvider:
    """Build a provider from 'file:<path>' or 'http:<url>', optionally cached."""
    if spec.startswith("file:"):
        provider: MappingProvider = FileMappingProvider(spec[len("file:") :])
    elif spec.startswith(("http:", "https:")):
        url = spec if spec.startswith(("http://", "https://")) else spec[len("http:") :]
        provider = HttpMappingProvider(url)
    else:
        raise MappingError(f"mapper spec must start with file: or http:, got {spec!r}")
    if cache_path is not None:
        return CachedMappingProvider(provider, cache_path)
    return provider
