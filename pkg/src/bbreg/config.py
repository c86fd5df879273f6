"""Runtime configuration read from a JSON file.

The file is located through ``--config`` or the ``BBREG_CONFIG`` environment
variable; every field is optional.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .errors import SchemaError
from .newform import DEFAULT_LMFDB_URL

ENV_VAR = "BBREG_CONFIG"


def _default_cache_dir() -> str:
    base = os.environ.get("XDG_CACHE_HOME") or os.path.join(os.path.expanduser("~"), ".cache")
    return os.path.join(base, "bbreg")


@dataclass(frozen=True)
class Config:
    """Settings shared by the command-line tools.

    Attributes:
        cache_dir: directory for fetched newforms and sieve results.
        lmfdb_base_url: root of the LMFDB REST API.
        filtration_depth: number of augmentation-ideal levels computed.
        group_size_cap: largest |G| * d for dense group-ring work.
        series_bound_cap: largest coefficient bound for the Delta engine.
        seed: default seed for randomised suites.
    """

    cache_dir: str = field(default_factory=_default_cache_dir)
    lmfdb_base_url: str = DEFAULT_LMFDB_URL
    filtration_depth: int = 8
    group_size_cap: int = 2000
    series_bound_cap: int = 10**6
    seed: int = 42

    def __post_init__(self):
        if self.filtration_depth < 1:
            raise SchemaError("filtration_depth must be >= 1")
        if self.group_size_cap < 1 or self.series_bound_cap < 1:
            raise SchemaError("size caps must be positive")
        if not 0 <= self.seed < 2**64:
            raise SchemaError("seed must be a 64-bit unsigned integer")

    def to_json(self) -> dict:
        return asdict(self)


def load_config(path: str | os.PathLike | None = None) -> Config:
    """Read the configuration from ``path``, ``$BBREG_CONFIG`` or the defaults.

    Raises:
        SchemaError: on unreadable JSON, unknown keys or invalid values.
    """
    path = path or os.environ.get(ENV_VAR)
    if not path:
        return Config()
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(obj, dict):
        raise SchemaError("config must be a JSON object")
    known = {f.name: f.type for f in fields(Config)}
    unknown = set(obj) - set(known) - {"schema"}
    if unknown:
        raise SchemaError(f"unknown config keys: {sorted(unknown)}")
    kwargs = {}
    for key, value in obj.items():
        if key == "schema":
            continue
        try:
            kwargs[key] = str(value) if key in ("cache_dir", "lmfdb_base_url") else int(value)
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"config key {key!r} must be an integer") from exc
    return Config(**kwargs)
