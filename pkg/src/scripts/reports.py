"""Output files. Every file carries tool version, config hash and seed."""
from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from src import __version__

TOOL = "spce-lab"


def config_hash(raw_config: Any) -> str:
    canonical = json.dumps(raw_config, sort_keys=True, separators=(",", ":"), ensure_ascii=True)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def provenance(raw_config: Any, seed: int) -> dict:
    return {"tool": TOOL, "version": __version__, "config_sha256": config_hash(raw_config), "seed": int(seed)}


def provenance_line(meta: dict) -> str:
    return f"{meta['tool']} {meta['version']} config_sha256={meta['config_sha256']} seed={meta['seed']}"


def _plain(value):
    # JSON has no inf/nan; numpy scalars are unwrapped
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def write_json(path: str | Path, meta: dict, body: dict) -> Path:
    path = Path(path)
    document = {"provenance": meta, **_plain(body)}
    path.write_text(json.dumps(document, indent=2, sort_keys=True, allow_nan=False) + "\n", encoding="utf-8")
    return path


def write_csv(path: str | Path, meta: dict, frame: pd.DataFrame) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# {provenance_line(meta)}\n")
        frame.to_csv(fh, index=False, lineterminator="\n")
    return path


def read_json(path: str | Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))
