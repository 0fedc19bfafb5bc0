from __future__ import annotations

import logging
import os
import shutil
import tempfile
import time
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path

from utils.manifest_utils import MANIFEST_NAME, load_manifest

logger = logging.getLogger(__name__)


class ResultStore:
    """Output directory that only ever receives a complete set of files.

    Files are written into a staging directory next to the target and moved in
    with ``os.replace`` once the writer finishes; a failure leaves the target as
    it was. Outputs listed in the previous manifest that the new run did not
    write are removed, other files in the directory are left alone.
    """

    def __init__(self, out_dir: str | Path) -> None:
        self._out_dir = Path(out_dir)

    @property
    def out_dir(self) -> Path:
        return self._out_dir

    @contextmanager
    def staging(self) -> Iterator[Path]:
        parent = self._out_dir.parent
        parent.mkdir(parents=True, exist_ok=True)
        staging = Path(tempfile.mkdtemp(prefix=f".{self._out_dir.name}_staging_", dir=parent))
        try:
            yield staging
            self._commit(staging)
        finally:
            if staging.exists():
                shutil.rmtree(staging, ignore_errors=True)

    def _commit(self, staging: Path) -> list[str]:
        names = sorted(entry.name for entry in staging.iterdir())
        if not self._out_dir.exists():
            self._replace_with_retry(staging, self._out_dir)
        else:
            stale = self._previous_outputs() - set(names)
            for name in names:
                self._replace_with_retry(staging / name, self._out_dir / name)
            for name in sorted(stale):
                (self._out_dir / name).unlink(missing_ok=True)
                logger.info("Removed stale output file=%s dir=%s", name, self._out_dir)
        logger.info("Committed outputs files=%s dir=%s", len(names), self._out_dir)
        return names

    def _previous_outputs(self) -> set[str]:
        path = self._out_dir / MANIFEST_NAME
        if not path.is_file():
            return set()
        try:
            manifest = load_manifest(path)
        except (OSError, ValueError) as exc:
            logger.warning("Ignoring unreadable previous manifest path=%s error=%s", path, exc)
            return set()
        names = set()
        for entry in manifest.get("outputs", []):
            name = entry.get("name") if isinstance(entry, dict) else None
            # plain file names only, never paths out of the directory
            if isinstance(name, str) and name not in ("", "..") and Path(name).name == name:
                names.add(name)
        return names

    @staticmethod
    def _is_retryable_windows_permission_error(error: PermissionError) -> bool:
        return int(getattr(error, "winerror", 0) or 0) in {5, 32}

    def _replace_with_retry(self, source: Path, target: Path) -> None:
        delays = (0.01, 0.02, 0.05)
        for attempt, delay in enumerate(delays, start=1):
            try:
                os.replace(source, target)
                return
            except PermissionError as error:
                if not self._is_retryable_windows_permission_error(error):
                    raise
                if attempt == len(delays):
                    raise
                time.sleep(delay)
