"""
Run configuration: JSON file + defaults + `--set` overrides, validated by
the section forms and turned into a RunConfig.
"""

import copy
import json
import logging
from pathlib import Path
from typing import Iterable, Optional

from .defaults import DEFAULT_RUN_CONFIG
from .detector import DetectorConfig
from .exceptions import ConfigurationError, DomainError
from .forms import ChannelForm, DetectorForm, RunSettingsForm, ScheduleEntryForm, SourceForm, TimingForm
from .montecarlo import RunConfig, ScheduleEntry
from .optics import ChannelConfig, TimingConfig
from .states import SourceConfig

logger = logging.getLogger(__name__)

RUN_SETTINGS = ('cycles', 'seed', 'workers', 'phase_mode', 'theta')
SECTION_FORMS = {
    'sources': SourceForm,
    'channels': ChannelForm,
    'detectors': DetectorForm,
}


def read_config_file(path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f'config file not found: {path}', {'config': f'{path} does not exist'})
    try:
        data = json.loads(path.read_text(encoding='utf-8'))
    except json.JSONDecodeError as exc:
        raise ConfigurationError(
            f'config file {path} is not valid JSON',
            {'config': f'line {exc.lineno} column {exc.colno}: {exc.msg}'},
        ) from exc
    except OSError as exc:
        raise ConfigurationError(f'cannot read config file {path}: {exc}') from exc
    if not isinstance(data, dict):
        raise ConfigurationError(f'config file {path} must hold a JSON object')
    return data


def merge_defaults(user: dict, defaults: Optional[dict] = None) -> dict:
    """
    Deep merge over the defaults. Lists of objects merge element by element;
    the schedule and plain lists are replaced.
    """
    merged = copy.deepcopy(DEFAULT_RUN_CONFIG if defaults is None else defaults)
    diagnostics = {}
    for key, value in user.items():
        if key not in merged:
            diagnostics[key] = 'unknown key'
            continue
        merged[key] = _merge_value(merged[key], value, key, diagnostics)
    if diagnostics:
        raise ConfigurationError('invalid run configuration', diagnostics)
    return merged


def _merge_value(base, value, path, diagnostics):
    if isinstance(base, dict) and isinstance(value, dict):
        out = dict(base)
        for key, item in value.items():
            if key not in base:
                diagnostics[f'{path}.{key}'] = 'unknown key'
                continue
            out[key] = _merge_value(base[key], item, f'{path}.{key}', diagnostics)
        return out
    if isinstance(base, list) and isinstance(value, list) and base and all(isinstance(b, dict) for b in base):
        out = []
        for i, item in enumerate(value):
            if i < len(base) and isinstance(item, dict):
                out.append(_merge_value(base[i], item, f'{path}.{i}', diagnostics))
            else:
                out.append(copy.deepcopy(item))
        return out
    return copy.deepcopy(value)


def parse_override(text: str):
    if '=' not in text:
        raise ConfigurationError(f'override {text!r} is not KEY=VALUE', {text: 'expected KEY=VALUE'})
    key, raw = text.split('=', 1)
    key = key.strip()
    if not key:
        raise ConfigurationError(f'override {text!r} has an empty key', {text: 'empty key'})
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


def apply_override(data: dict, text: str) -> dict:
    """Set a dotted path such as detectors.0.tau_ns=100 in place."""
    key, value = parse_override(text)
    parts = key.split('.')
    node = data
    for depth, part in enumerate(parts):
        last = depth == len(parts) - 1
        where = '.'.join(parts[:depth + 1])
        if isinstance(node, list):
            if not part.isdigit() or int(part) >= len(node):
                raise ConfigurationError(f'cannot apply override {text!r}', {where: 'no such list index'})
            index = int(part)
            if last:
                node[index] = value
            else:
                node = node[index]
        elif isinstance(node, dict):
            if part not in node:
                raise ConfigurationError(f'cannot apply override {text!r}', {where: 'unknown key'})
            if last:
                node[part] = value
            else:
                node = node[part]
        else:
            raise ConfigurationError(f'cannot apply override {text!r}', {where: 'not a section'})
    return data


def _form_errors(form, prefix, diagnostics):
    for field_name, errors in form.errors.items():
        path = prefix if field_name == '__all__' else f'{prefix}.{field_name}'
        diagnostics[path] = ' '.join(errors)


def _validate(form_class, data, prefix, diagnostics):
    if not isinstance(data, dict):
        diagnostics[prefix] = 'expected an object'
        return None
    form = form_class(data=data)
    if not form.is_valid():
        _form_errors(form, prefix, diagnostics)
        return None
    return form.cleaned_data


def _detector(cleaned) -> DetectorConfig:
    optional = {
        'kinetic_inductance': cleaned.get('kinetic_inductance'),
        'kappa': cleaned.get('kappa'),
        'pileup_floor_ns': cleaned.get('pileup_floor_ns') or 0.0,
        'load_resistance_ohm': cleaned['load_resistance_ohm'],
    }
    if cleaned.get('tau_ns') is None:
        return DetectorConfig.from_physics(
            optional['kinetic_inductance'], optional['load_resistance_ohm'], optional['kappa'],
            optional['pileup_floor_ns'], eta=cleaned['eta'], dark_rate_hz=cleaned['dark_rate_hz'],
        )
    return DetectorConfig(eta=cleaned['eta'], dark_rate_hz=cleaned['dark_rate_hz'], tau_ns=cleaned['tau_ns'], **optional)


def build_run_config(data: dict) -> RunConfig:
    """Validate every section; all field problems are reported together."""
    diagnostics = {}
    settings = _validate(RunSettingsForm, {k: data.get(k) for k in RUN_SETTINGS}, 'run', diagnostics)

    sections = {}
    for name, form_class in SECTION_FORMS.items():
        items = data.get(name)
        if not isinstance(items, list) or len(items) != 2:
            diagnostics[name] = 'exactly two entries (station A, station B) are required'
            continue
        sections[name] = [_validate(form_class, item, f'{name}.{i}', diagnostics) for i, item in enumerate(items)]
    timing = _validate(TimingForm, data.get('timing'), 'timing', diagnostics)

    schedule = []
    if data.get('schedule') is not None:
        if not isinstance(data['schedule'], list) or not data['schedule']:
            diagnostics['schedule'] = 'expected a non-empty list or null'
        else:
            schedule = [
                _validate(ScheduleEntryForm, entry, f'schedule.{i}', diagnostics)
                for i, entry in enumerate(data['schedule'])
            ]
    if diagnostics:
        raise ConfigurationError('invalid run configuration', diagnostics)

    try:
        sources = tuple(
            SourceConfig(tuple(s['intensities']), s['extinction_db'], s.get('prep_phase_error_rad') or 0.0)
            for s in sections['sources']
        )
        channels = tuple(
            ChannelConfig(c['length_km'], c['attenuation_db_per_km'], c.get('extra_loss_db') or 0.0)
            for c in sections['channels']
        )
        detectors = tuple(_detector(d) for d in sections['detectors'])
        timing_config = TimingConfig(timing['rep_rate_hz'], timing['bin_separation_ns'], timing['pulse_width_ns'])
    except DomainError as exc:
        raise ConfigurationError('invalid run configuration', {'physics': str(exc)}) from exc

    return RunConfig(
        cycles=settings['cycles'],
        seed=settings['seed'],
        sources=sources,
        channels=channels,
        detectors=detectors,
        timing=timing_config,
        schedule=tuple(
            ScheduleEntry(e['basis'], e['state_a'], e['state_b'], e['mu_a'], e['mu_b'], e['weight'])
            for e in schedule
        ),
        phase_mode=settings['phase_mode'],
        theta=settings.get('theta') or 0.0,
        workers=settings['workers'],
    )


def load_config(path=None, overrides: Iterable[str] = (), cycles=None, seed=None) -> RunConfig:
    """
    File (optional) -> defaults -> --set overrides -> --cycles/--seed.
    """
    data = merge_defaults(read_config_file(path) if path else {})
    for text in overrides:
        apply_override(data, text)
    if cycles is not None:
        data['cycles'] = cycles
    if seed is not None:
        data['seed'] = seed
    config = build_run_config(data)
    logger.debug('run configuration %s', config.config_digest())
    return config
