"""
Run manifests and the run registry.

A manifest sits next to a command's outputs and records everything needed
to reproduce them: the canonical configuration and its digests, the seed,
the tool version, inputs and outputs.
"""

import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List, Optional

from django.conf import settings
from django.db import DatabaseError
from django.utils import timezone
from django.utils.dateparse import parse_datetime

from . import __version__

logger = logging.getLogger(__name__)


@dataclass
class RunManifest:
    command: str
    config_digest: str = ''
    physics_digest: str = ''
    seed: Optional[int] = None
    tool_version: str = __version__
    started_at: str = ''
    finished_at: str = ''
    inputs: List[str] = field(default_factory=list)
    outputs: List[str] = field(default_factory=list)
    config: Optional[dict] = None
    parameters: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + '\n'

    @classmethod
    def from_json(cls, text: str) -> 'RunManifest':
        return cls(**json.loads(text))


def now_iso() -> str:
    return timezone.now().isoformat(timespec='seconds')


def resolve_output(path) -> Path:
    """Relative output paths are placed under BELLSIM_OUTPUT_DIR when it is set."""
    path = Path(path)
    base = getattr(settings, 'BELLSIM_OUTPUT_DIR', '')
    if base and not path.is_absolute():
        return Path(base) / path
    return path


def manifest_path_for(output_stem: Path) -> Path:
    suffix = getattr(settings, 'BELLSIM_MANIFEST_SUFFIX', '.manifest.json')
    return output_stem.with_name(output_stem.name + suffix)


def record_run(manifest: RunManifest, manifest_path: Path) -> bool:
    """Index a finished run; the files remain authoritative if the database is unavailable."""
    from .models import RunRecord

    started_at = parse_datetime(manifest.started_at) if manifest.started_at else None
    try:
        RunRecord.objects.create(
            command=manifest.command,
            config_digest=manifest.config_digest,
            physics_digest=manifest.physics_digest,
            seed='' if manifest.seed is None else str(manifest.seed),
            tool_version=manifest.tool_version,
            started_at=started_at or timezone.now(),
            finished_at=timezone.now(),
            inputs=manifest.inputs,
            outputs=manifest.outputs,
            manifest_path=str(manifest_path),
        )
    except (DatabaseError, OverflowError) as exc:
        logger.warning('run registry unavailable (%s); run %s not indexed', exc, manifest.config_digest[:12])
        return False
    return True
