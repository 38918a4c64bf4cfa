"""Run manifests: config echo, resolved constants with provenance, file
inventory with content digests.  Re-running an identical config must
reproduce identical data digests."""

import hashlib
import json
from pathlib import Path

from . import __version__
from .config import ExperimentConfig, config_as_dict
from .errors import AnalysisError
from .scaling import CriticalConstants

MANIFEST_NAME = "manifest.json"


def file_digest(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def constants_record(constants: CriticalConstants) -> dict:
    return {
        "family": constants.family,
        "d": constants.d,
        "eta": constants.eta,
        "z": constants.z,
        "J": constants.J,
        "critical_point": constants.critical_point,
        "kappa": constants.kappa,
        "y_h": constants.y_h,
        "provenance": constants.provenance(),
    }


def write_manifest(
    out_dir,
    config: ExperimentConfig,
    constants: CriticalConstants,
    data_files: list[Path],
    realization_counts: dict[str, int],
    wall_clock_seconds: float,
    complete: bool = True,
) -> Path:
    out_dir = Path(out_dir)
    manifest = {
        "schema": "isingquench-manifest-v1",
        "code_version": __version__,
        "complete": complete,
        "config": config_as_dict(config),
        "constants": constants_record(constants),
        "realization_counts": realization_counts,
        "wall_clock_seconds": wall_clock_seconds,
        "files": [
            {"path": str(Path(p).relative_to(out_dir)), "sha256": file_digest(p)}
            for p in data_files
        ],
    }
    path = out_dir / MANIFEST_NAME
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def load_manifest(out_dir) -> dict:
    path = Path(out_dir) / MANIFEST_NAME
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise AnalysisError(f"cannot read manifest: {exc}") from None


def verify_manifest(out_dir) -> list[str]:
    """Check that every listed file exists and digest-matches.

    Returns a list of problems (empty means the inventory is intact).
    """
    out_dir = Path(out_dir)
    manifest = load_manifest(out_dir)
    problems = []
    for entry in manifest["files"]:
        path = out_dir / entry["path"]
        if not path.exists():
            problems.append(f"{entry['path']}: missing")
        elif file_digest(path) != entry["sha256"]:
            problems.append(f"{entry['path']}: digest mismatch")
    return problems
