from pydantic import Field

from .base import RecordBaseModel


class ManifestEntry(RecordBaseModel):
    path: str
    sha256: str = Field(pattern=r"^[0-9a-f]{64}$")
    size: int = Field(ge=0)


class Manifest(RecordBaseModel):
    """Every file of one run with its content hash, sorted by path."""

    experiment: str
    seed: int
    config_sha256: str
    files: list[ManifestEntry]
