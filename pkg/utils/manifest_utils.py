import hashlib
import json
import logging
from collections.abc import Mapping, Sequence
from pathlib import Path
from typing import Any

from version import __version__

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
_CHUNK = 1024 * 1024


class ManifestFormatError(ValueError):
    """Raised when a manifest has an invalid structure."""


class ManifestIntegrityError(ValueError):
    """Raised when an output file no longer matches its recorded checksum."""


def compute_checksum(data: dict) -> str:
    if not isinstance(data, dict):
        raise ManifestFormatError("Checksum payload must be object")
    serialized = json.dumps(
        data,
        sort_keys=True,
        ensure_ascii=False,
        separators=(",", ":"),
    )
    return hashlib.sha256(serialized.encode("utf-8")).hexdigest()


def file_checksum(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(_CHUNK), b""):
            digest.update(chunk)
    return digest.hexdigest()


def build_manifest(
    *,
    command: str,
    config: Mapping[str, str],
    seeds: Sequence[int],
    directory: str | Path,
    files: Sequence[str],
) -> dict[str, Any]:
    """Everything needed to rerun: command, resolved config, seeds and output checksums.

    No timestamps, so identical runs give identical manifests.
    """
    outputs = [
        {"name": name, "sha256": file_checksum(Path(directory) / name)} for name in sorted(files)
    ]
    resolved = {key: str(config[key]) for key in sorted(config)}
    return {
        "command": command,
        "version": __version__,
        "config": resolved,
        "config_checksum": compute_checksum(resolved),
        "seeds": [int(seed) for seed in seeds],
        "outputs": outputs,
    }


def write_manifest(manifest: dict[str, Any], directory: str | Path) -> Path:
    path = Path(directory) / MANIFEST_NAME
    with open(path, "w", encoding="utf-8", newline="\n") as fp:
        json.dump(manifest, fp, ensure_ascii=False, indent=2, sort_keys=True)
        fp.write("\n")
    return path


def load_manifest(path: str | Path) -> dict[str, Any]:
    with open(path, encoding="utf-8") as fp:
        payload = json.load(fp)
    if not isinstance(payload, dict) or not isinstance(payload.get("config"), dict):
        raise ManifestFormatError(f"{path}: manifest must be an object with a 'config' mapping")
    if payload.get("config_checksum") != compute_checksum(payload["config"]):
        raise ManifestIntegrityError(f"{path}: config checksum mismatch")
    return payload


def verify_outputs(manifest: Mapping[str, Any], directory: str | Path) -> list[str]:
    """Names of recorded outputs whose checksum no longer matches (missing files included)."""
    mismatched = []
    for entry in manifest.get("outputs", []):
        path = Path(directory) / entry["name"]
        if not path.exists() or file_checksum(path) != entry["sha256"]:
            mismatched.append(entry["name"])
    return mismatched
