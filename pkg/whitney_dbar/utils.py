import hashlib
import logging
from pathlib import Path

from .schemas.manifest import Manifest, ManifestEntry


logger = logging.getLogger(__name__)


#####################
### Run artifacts ###
#####################


def sha256_hex(payload: bytes) -> str:
    return hashlib.sha256(payload).hexdigest()


def write_artifacts(out_dir: Path, artifacts: dict[str, bytes]) -> list[ManifestEntry]:
    """Write files in sorted order and return their manifest entries."""
    out_dir.mkdir(parents=True, exist_ok=True)
    entries: list[ManifestEntry] = []
    for name in sorted(artifacts):
        payload = artifacts[name]
        path = out_dir / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(payload)
        logger.debug("Wrote '%s' (%d bytes)", path, len(payload))
        entries.append(ManifestEntry(path=name, sha256=sha256_hex(payload), size=len(payload)))
    return entries


def write_manifest(out_dir: Path, manifest: Manifest) -> Path:
    path = out_dir / "manifest.json"
    path.write_text(manifest.model_dump_json(indent=2) + "\n")
    logger.info("Manifest with %d files written to '%s'", len(manifest.files), path)
    return path


###############
### Logging ###
###############


def configure_logging(
    app_level: int | str = logging.INFO, numba_level: int | str = logging.WARNING
) -> None:
    app_formatter = logging.Formatter(
        "[%(asctime)s.%(msecs)03d] %(module)10s:line %(lineno)-3d %(levelname)-7s - %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )

    app_handler = logging.StreamHandler()
    app_handler.setFormatter(app_formatter)
    app_handler.setLevel(app_level)

    app_logger = logging.getLogger()
    app_logger.setLevel(app_level)
    app_logger.handlers = []
    app_logger.addHandler(app_handler)

    # numba's compiler logs at DEBUG through its own hierarchy
    numba_logger = logging.getLogger("numba")
    numba_logger.setLevel(numba_level)
