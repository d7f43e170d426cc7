"""Persistent memo store for exact intersection numbers.

On-disk format (newline-delimited, versioned):

    line 1:  JSON header {"magic": "wpvol-cache", "version": 1, ...}
    line k:  JSON record {"key": "g:n:d1,d2,...", "value": ["p/q", ...],
                          "crc": "xxxxxxxx"}

``crc`` is CRC-32 over ``key + "|" + json(value)``, so cache poisoning is
detectable record by record.  Writes go to a temporary file followed by an
atomic rename, so an interrupted run leaves either the old or the new file,
both loadable.
"""

from __future__ import annotations

import json
import os
import tempfile
import zlib
from threading import Lock
from typing import Iterator

from .errors import CacheError
from .exact import PiPoly

HEADER = {"magic": "wpvol-cache", "version": 1, "schema_version": 1}

KeyType = tuple[int, int, tuple[int, ...]]


def _key_str(key: KeyType) -> str:
    g, n, d = key
    return f"{g}:{n}:{','.join(map(str, d))}"


def _key_parse(text: str) -> KeyType:
    g_s, n_s, d_s = text.split(":")
    d = tuple(int(t) for t in d_s.split(",")) if d_s else ()
    return int(g_s), int(n_s), d


def _crc(key_text: str, value_json: str) -> str:
    return format(zlib.crc32((key_text + "|" + value_json).encode()), "08x")


class MemoStore:
    """Map from canonical (g, n, d) keys to exact PiPoly values.

    A key, once inserted, is never overwritten with a different value
    (attempting to raises :class:`CacheError`); duplicate insertion of the
    identical value is a no-op, so concurrent recomputation is harmless
    (first writer wins).  Lookups are plain dict reads; insertions are
    serialized by a lock.
    """

    def __init__(self) -> None:
        self._data: dict[KeyType, PiPoly] = {}
        self._lock = Lock()
        self.hits = 0
        self.misses = 0

    # -- mapping ------------------------------------------------------------
    def get(self, key: KeyType) -> PiPoly | None:
        value = self._data.get(key)
        if value is None:
            self.misses += 1
        else:
            self.hits += 1
        return value

    def insert(self, key: KeyType, value: PiPoly) -> PiPoly:
        with self._lock:
            existing = self._data.get(key)
            if existing is None:
                self._data[key] = value
                return value
            if existing != value:
                raise CacheError(f"conflicting value for key {key}")
            return existing

    def __len__(self) -> int:
        return len(self._data)

    def __contains__(self, key: KeyType) -> bool:
        return key in self._data

    def items(self) -> Iterator[tuple[KeyType, PiPoly]]:
        return iter(sorted(self._data.items()))

    def clear(self) -> None:
        with self._lock:
            self._data.clear()
            self.hits = self.misses = 0

    def stats(self) -> dict:
        return {"entries": len(self._data), "hits": self.hits, "misses": self.misses}

    # -- persistence ---------------------------------------------------------
    def save(self, path: str | os.PathLike) -> None:
        """Atomically write all entries (write-ahead temp + rename)."""
        path = os.fspath(path)
        directory = os.path.dirname(os.path.abspath(path)) or "."
        fd, tmp = tempfile.mkstemp(prefix=".wpvol-cache-", dir=directory)
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(json.dumps(HEADER) + "\n")
                for key, value in self.items():
                    key_text = _key_str(key)
                    value_json = json.dumps(value.to_strings())
                    record = {
                        "key": key_text,
                        "value": json.loads(value_json),
                        "crc": _crc(key_text, value_json),
                    }
                    fh.write(json.dumps(record) + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    @staticmethod
    def load(path: str | os.PathLike) -> "MemoStore":
        store = MemoStore()
        with open(path) as fh:
            header_line = fh.readline()
            try:
                header = json.loads(header_line)
            except json.JSONDecodeError as exc:
                raise CacheError(f"unreadable cache header: {exc}") from exc
            if header.get("magic") != HEADER["magic"]:
                raise CacheError("not a wpvol cache file")
            if header.get("version") != HEADER["version"]:
                raise CacheError(f"unsupported cache version {header.get('version')}")
            for line_no, line in enumerate(fh, start=2):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                    key_text = record["key"]
                    value_items = record["value"]
                    value_json = json.dumps(value_items)
                    if record["crc"] != _crc(key_text, value_json):
                        raise CacheError(f"checksum mismatch at line {line_no}")
                    key = _key_parse(key_text)
                    value = PiPoly.from_strings(value_items)
                except CacheError:
                    raise
                except Exception as exc:
                    raise CacheError(f"corrupt cache record at line {line_no}: {exc}") from exc
                store._data[key] = value
        return store
