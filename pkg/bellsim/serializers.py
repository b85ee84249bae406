"""
File formats: counts tables (CSV and JSON), analysis and decoy reports,
inter-arrival histograms. Outputs are committed together through
OutputBatch so a failed command leaves no partial files behind.
"""

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from .bsm import PROJECTIONS, AnalysisReport, LINEAR_OPTICS_LIMIT
from .exceptions import ParseError
from .montecarlo import CountsKey, CountsTable, Tally
from .states import BITS, Basis

COUNTS_FORMAT = 'bellsim-counts'
FORMAT_VERSION = 1
COUNTS_COLUMNS = ['basis', 'state_a', 'state_b', 'mu_a', 'mu_b', 'n_cycles', 'n_psiminus', 'n_psiplus']
HISTOGRAM_COLUMNS = ['bin_start_ns', 'count']


def _dumps(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + '\n'


# Counts

def counts_rows(counts: CountsTable):
    for key, tally in counts.sorted_items():
        yield [key.basis, key.state_a, key.state_b, repr(float(key.mu_a)), repr(float(key.mu_b)),
               tally.n_cycles, tally.n_psiminus, tally.n_psiplus]


def counts_to_csv(counts: CountsTable, manifest: Optional[str] = None) -> str:
    buffer = io.StringIO()
    if manifest:
        buffer.write(f'# manifest: {manifest}\n')
    buffer.write(f'# config_digest: {counts.config_digest or ""}\n')
    buffer.write(f'# seeds: {" ".join(str(s) for s in counts.seeds)}\n')
    buffer.write(f'# metadata: {json.dumps(counts.metadata, sort_keys=True)}\n')
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(COUNTS_COLUMNS)
    writer.writerows(counts_rows(counts))
    return buffer.getvalue()


def counts_to_json(counts: CountsTable, manifest: Optional[str] = None) -> str:
    return _dumps({
        'manifest': manifest,
        'format': COUNTS_FORMAT,
        'version': FORMAT_VERSION,
        'config_digest': counts.config_digest,
        'seeds': list(counts.seeds),
        'metadata': counts.metadata,
        'entries': [dict(zip(COUNTS_COLUMNS, row[:3] + [float(row[3]), float(row[4])] + row[5:]))
                    for row in counts_rows(counts)],
    })


def _parse_entry(values: dict, line) -> Tuple[CountsKey, Tally]:
    basis = values.get('basis')
    if basis not in {b.value for b in Basis}:
        raise ParseError(f'unknown basis {basis!r}', line)
    bits = BITS[Basis(basis)]
    for name in ('state_a', 'state_b'):
        if values.get(name) not in bits:
            raise ParseError(f'{name} {values.get(name)!r} is not a {basis}-basis state', line)
    try:
        mu_a, mu_b = float(values['mu_a']), float(values['mu_b'])
        n_cycles, n_minus, n_plus = (int(values[k]) for k in ('n_cycles', 'n_psiminus', 'n_psiplus'))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f'bad numeric field: {exc}', line) from exc
    if mu_a < 0 or mu_b < 0:
        raise ParseError('intensities must be >= 0', line)
    if min(n_cycles, n_minus, n_plus) < 0 or n_minus + n_plus > n_cycles:
        raise ParseError('need 0 <= n_psiminus + n_psiplus <= n_cycles', line)
    return CountsKey(basis, values['state_a'], values['state_b'], mu_a, mu_b), Tally(n_cycles, n_minus, n_plus)


def _add_entry(entries, key, tally, line):
    if key in entries:
        raise ParseError(f'duplicate entry for {key.basis} {key.state_a}{key.state_b} ({key.mu_a:g}, {key.mu_b:g})', line)
    entries[key] = tally


def counts_from_csv(text: str) -> CountsTable:
    header = None
    digest, seeds, metadata = None, (), {}
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith('#'):
            name, _, value = line[1:].partition(':')
            name, value = name.strip(), value.strip()
            if name == 'config_digest':
                digest = value or None
            elif name == 'seeds':
                try:
                    seeds = tuple(int(s) for s in value.split())
                except ValueError as exc:
                    raise ParseError(f'bad seed list: {value}', lineno) from exc
            elif name == 'metadata':
                try:
                    metadata = json.loads(value) if value else {}
                except json.JSONDecodeError as exc:
                    raise ParseError(f'bad metadata: {exc.msg}', lineno) from exc
            continue
        fields = next(csv.reader([raw]))
        if header is None:
            if [f.strip() for f in fields] != COUNTS_COLUMNS:
                raise ParseError(f'expected header {",".join(COUNTS_COLUMNS)}', lineno)
            header = COUNTS_COLUMNS
            continue
        if len(fields) != len(COUNTS_COLUMNS):
            raise ParseError(f'expected {len(COUNTS_COLUMNS)} fields, got {len(fields)}', lineno)
        key, tally = _parse_entry(dict(zip(COUNTS_COLUMNS, (f.strip() for f in fields))), lineno)
        _add_entry(entries, key, tally, lineno)
    if header is None:
        raise ParseError('missing header row', 1)
    return CountsTable(entries=entries, seeds=tuple(sorted(seeds)), config_digest=digest, metadata=metadata)


def counts_from_json(text: str) -> CountsTable:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno) from exc
    if not isinstance(data, dict) or data.get('format') != COUNTS_FORMAT:
        raise ParseError(f'not a {COUNTS_FORMAT} document', 1)
    entries = {}
    for index, item in enumerate(data.get('entries') or []):
        where = f'entry {index}'
        if not isinstance(item, dict):
            raise ParseError(f'{where} is not an object')
        try:
            key, tally = _parse_entry(item, None)
        except ParseError as exc:
            raise ParseError(f'{where}: {exc}') from exc
        if key in entries:
            raise ParseError(f'{where}: duplicate entry')
        entries[key] = tally
    return CountsTable(
        entries=entries,
        seeds=tuple(sorted(int(s) for s in data.get('seeds') or ())),
        config_digest=data.get('config_digest'),
        metadata=data.get('metadata') or {},
    )


def read_counts(path) -> CountsTable:
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except FileNotFoundError as exc:
        raise ParseError(f'counts file not found: {path}') from exc
    if text.lstrip().startswith('{'):
        return counts_from_json(text)
    return counts_from_csv(text)


# Analysis report

def _rate(value: Optional[float]) -> Optional[float]:
    return None if value is None else float(value)


def analysis_to_dict(report: AnalysisReport) -> dict:
    return {
        'intensities': list(report.intensities) if report.intensities else None,
        'has_projections': report.has_projections,
        'eq1_reference': report.eq1_reference,
        'basis_averaged_efficiency': report.basis_averaged,
        'linear_optics_limit': LINEAR_OPTICS_LIMIT,
        'bases': {
            basis.value: {
                'n_cycles': summary.n_cycles,
                'projections': {o.label: summary.projections.get(o, 0) for o in PROJECTIONS},
                'errors': {o.label: summary.errors.get(o, 0) for o in PROJECTIONS},
                'error_rates': {o.label: _rate(summary.error_rate(o)) for o in PROJECTIONS},
                'efficiencies': {o.label: summary.efficiencies.get(o, 0.0) for o in PROJECTIONS},
                'total_efficiency': summary.total_efficiency,
            }
            for basis, summary in sorted(report.bases.items(), key=lambda item: item[0].value != 'z')
        },
    }


def _pct(value: Optional[float]) -> str:
    return '     n/a' if value is None else f'{100 * value:7.3f}%'


def analysis_to_text(report: AnalysisReport) -> str:
    if not report.has_projections:
        return 'no projections\n'
    mu_a, mu_b = report.intensities
    lines = [f'Raw analysis at intensities ({mu_a:g}, {mu_b:g})', '']
    lines.append(f'{"basis":<6}{"outcome":<9}{"projections":>12}{"errors":>9}{"error rate":>12}{"efficiency":>12}')
    for basis, summary in sorted(report.bases.items(), key=lambda item: item[0].value != 'z'):
        for outcome in PROJECTIONS:
            lines.append(
                f'{basis.value:<6}{outcome.label:<9}{summary.projections.get(outcome, 0):>12}'
                f'{summary.errors.get(outcome, 0):>9}{_pct(summary.error_rate(outcome)):>12}'
                f'{_pct(summary.efficiencies.get(outcome, 0.0)):>12}'
            )
        lines.append(f'{basis.value:<6}{"total":<9}{"":>33}{_pct(summary.total_efficiency):>12}')
    lines.append('')
    if report.eq1_reference is not None:
        lines.append(f'reference eta1 eta2 / 2:          {_pct(report.eq1_reference)}')
    if report.basis_averaged is not None:
        lines.append(f'basis average (z + 2x)/3:        {_pct(report.basis_averaged)}')
    return '\n'.join(lines) + '\n'


def analysis_to_csv(report: AnalysisReport) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(['basis', 'outcome', 'n_cycles', 'projections', 'errors', 'error_rate', 'efficiency'])
    for basis, summary in sorted(report.bases.items(), key=lambda item: item[0].value != 'z'):
        for outcome in PROJECTIONS:
            rate = summary.error_rate(outcome)
            writer.writerow([
                basis.value, outcome.label, summary.n_cycles,
                summary.projections.get(outcome, 0), summary.errors.get(outcome, 0),
                '' if rate is None else repr(float(rate)),
                repr(float(summary.efficiencies.get(outcome, 0.0))),
            ])
    return buffer.getvalue()


# Decoy bounds

def bounds_to_dict(bounds) -> dict:
    return {
        'label': bounds.label,
        'basis': bounds.basis.value,
        'outcome': bounds.outcome,
        'Y11_lower': bounds.Y11_lower,
        'e11_upper': bounds.e11_upper,
        'Q11_lower': bounds.Q11_lower,
        'eta_bsm': bounds.eta_bsm,
        'mu': list(bounds.mu),
        'cutoff': bounds.cutoff,
        'sigmas': bounds.sigmas,
        'transmission': bounds.transmission,
    }


def decoy_to_json(results: Sequence, basis_averaged: Optional[float] = None, manifest: Optional[str] = None) -> str:
    return _dumps({
        'manifest': manifest,
        'bounds': [bounds_to_dict(b) for b in results],
        'basis_averaged_eta_bsm': basis_averaged,
    })


def decoy_to_text(results: Sequence, basis_averaged: Optional[float] = None) -> str:
    if not results:
        return 'no bounds\n'
    first = results[0]
    lines = [
        f'{first.label} (photon cutoff {first.cutoff}, {first.sigmas:g} sigma)',
        '',
        f'{"basis":<6}{"outcome":<10}{"Y11 >=":>12}{"Q11 >=":>12}{"e11 <=":>10}{"eta_BSM >=":>12}',
    ]
    for b in results:
        lines.append(
            f'{b.basis.value:<6}{b.outcome:<10}{b.Y11_lower:>12.4e}{b.Q11_lower:>12.4e}'
            f'{_pct(b.e11_upper):>10}{_pct(b.eta_bsm):>12}'
        )
    if basis_averaged is not None:
        lines.extend(['', f'basis-averaged eta_BSM (z + 2x)/3: {_pct(basis_averaged)}'])
    return '\n'.join(lines) + '\n'


def decoy_to_csv(results: Sequence) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    columns = ['label', 'basis', 'outcome', 'Y11_lower', 'e11_upper', 'Q11_lower', 'eta_bsm', 'cutoff', 'sigmas']
    writer.writerow(columns)
    for b in results:
        row = bounds_to_dict(b)
        writer.writerow(['' if row[c] is None else row[c] for c in columns])
    return buffer.getvalue()


# Histogram

def histogram_to_json(histogram, manifest: Optional[str] = None) -> str:
    return _dumps({
        'manifest': manifest,
        'rate_hz': histogram.rate_hz,
        'tau_ns': histogram.tau_ns,
        'bin_width_ns': histogram.bin_width_ns,
        'n_detections': histogram.n_detections,
        'counts': [int(c) for c in histogram.counts],
    })


def histogram_to_csv(histogram) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(HISTOGRAM_COLUMNS)
    for start, count in histogram.rows():
        writer.writerow([repr(float(start)), int(count)])
    return buffer.getvalue()


# Atomic output

class OutputBatch:
    """
    Collects (path, text) pairs and commits them all at once.
    Each file is written to a temporary sibling and renamed into place only
    after every file has been written.
    """

    def __init__(self):
        self.pending: List[Tuple[Path, str]] = []

    def add(self, path, text: str):
        self.pending.append((Path(path), text))

    @property
    def paths(self) -> List[Path]:
        return [path for path, _ in self.pending]

    def commit(self):
        staged = []
        try:
            for path, text in self.pending:
                path.parent.mkdir(parents=True, exist_ok=True)
                fd, tmp = tempfile.mkstemp(prefix=f'.{path.name}.', suffix='.tmp', dir=path.parent)
                staged.append((tmp, path))
                with os.fdopen(fd, 'w', encoding='utf-8', newline='') as handle:
                    handle.write(text)
            for tmp, path in staged:
                os.replace(tmp, path)
        except BaseException:
            for tmp, _ in staged:
                if os.path.exists(tmp):
                    os.unlink(tmp)
            raise
        self.pending = []


def atomic_write(path, text: str):
    batch = OutputBatch()
    batch.add(path, text)
    batch.commit()


def analysis_to_json(report: AnalysisReport, manifest: Optional[str] = None) -> str:
    data = analysis_to_dict(report)
    data['manifest'] = manifest
    return _dumps(data)


def with_manifest_comment(text: str, manifest: Optional[str]) -> str:
    """CSV outputs name their manifest in a leading comment line."""
    if not manifest:
        return text
    return f'# manifest: {manifest}\n' + text
