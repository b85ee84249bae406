"""
Shared plumbing for the bellsim management commands.
"""

import logging
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Dict, Optional

from django.core.management.base import BaseCommand, CommandError

from bellsim.exceptions import BellSimError, DomainError, InfeasibleError
from bellsim.manifest import RunManifest, manifest_path_for, now_iso, record_run, resolve_output
from bellsim.serializers import OutputBatch

logger = logging.getLogger('bellsim.commands')

OUTPUT_SUFFIXES = ('.csv', '.json')


def parse_count(text) -> int:
    """Accepts 1000000, 1e6 or 1_000_000; integers of any size stay exact."""
    cleaned = str(text).strip().replace('_', '')
    try:
        value = int(cleaned)
    except ValueError:
        try:
            number = Decimal(cleaned)
        except InvalidOperation:
            raise DomainError(f'{text!r} is not a number')
        if not number.is_finite() or number != number.to_integral_value():
            raise DomainError(f'{text!r} is not a non-negative integer')
        value = int(number)
    if value < 0:
        raise DomainError(f'{text!r} is not a non-negative integer')
    return value


def parse_pair(text, name) -> Optional[tuple]:
    if text is None:
        return None
    try:
        first, second = (float(part) for part in text.split(','))
    except ValueError:
        raise DomainError(f'{name} expects two comma-separated numbers, got {text!r}')
    return first, second


def output_stem(out) -> Path:
    path = resolve_output(out)
    if path.suffix in OUTPUT_SUFFIXES:
        path = path.with_suffix('')
    return path


class BellsimCommand(BaseCommand):
    """
    Subclasses implement run(); package errors become CommandError with the
    exit code their class declares.
    """
    name = ''

    def handle(self, *args, **options):
        try:
            self.run(*args, **options)
        except InfeasibleError as exc:
            self.stderr.write(exc.certificate())
            raise CommandError(str(exc), returncode=exc.exit_code) from exc
        except BellSimError as exc:
            raise CommandError(str(exc), returncode=exc.exit_code) from exc

    def run(self, *args, **options):
        raise NotImplementedError

    def start_manifest(self, **fields) -> RunManifest:
        return RunManifest(command=self.name, started_at=now_iso(), **fields)

    def commit(self, stem: Path, outputs: Dict[Path, str], manifest: RunManifest) -> Path:
        """Write outputs and their manifest together, then index the run."""
        manifest_path = manifest_path_for(stem)
        manifest.outputs = [str(path) for path in outputs]
        manifest.finished_at = now_iso()

        batch = OutputBatch()
        for path, text in outputs.items():
            batch.add(path, text)
        batch.add(manifest_path, manifest.to_json())
        batch.commit()
        record_run(manifest, manifest_path)
        for path in outputs:
            self.stdout.write(f'wrote {path}')
        self.stdout.write(f'wrote {manifest_path}')
        return manifest_path
