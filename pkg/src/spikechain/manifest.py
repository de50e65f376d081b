"""Run manifests: content-addressed run ids and byte-replayable records."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .config import serialize_config

__all__ = ["RunManifest", "run_id_for", "canonical_json"]


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def run_id_for(config: dict, seed: int) -> str:
    """Content hash of (canonical config, seed); identical inputs give
    identical ids, hence identical output directories."""
    payload = serialize_config(config) + f"\nseed={seed}\n"
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


@dataclass
class RunManifest:
    run_id: str
    subcommand: str
    seed: int
    config: dict
    outputs: dict = field(default_factory=dict)   # relative path -> sha256
    rng_draws: dict = field(default_factory=dict)
    wall_clock_s: float = 0.0
    package_version: str = __version__

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "subcommand": self.subcommand,
            "seed": self.seed,
            "config": self.config,
            "outputs": self.outputs,
            "rng_draws": self.rng_draws,
            "wall_clock_s": self.wall_clock_s,
            "package_version": self.package_version,
        }

    def write(self, directory: Path) -> Path:
        path = Path(directory) / "manifest.json"
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")
        return path

    @classmethod
    def read(cls, path) -> "RunManifest":
        doc = json.loads(Path(path).read_text())
        return cls(
            run_id=doc["run_id"], subcommand=doc["subcommand"], seed=doc["seed"],
            config=doc["config"], outputs=doc.get("outputs", {}),
            rng_draws=doc.get("rng_draws", {}),
            wall_clock_s=doc.get("wall_clock_s", 0.0),
            package_version=doc.get("package_version", __version__),
        )


def file_sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
