"""
Default run configuration: the parameters of the 20 km-per-arm time-bin
experiment (two SNSPDs, 5 MHz clock, 75 ns bin separation).
"""

DEFAULT_CYCLES = 1_000_000
DEFAULT_SEED = 0

DEFAULT_SOURCE = {
    'intensities': [0.11, 0.05, 0.0],
    'extinction_db': 50.0,
    'prep_phase_error_rad': 0.0,
}

DEFAULT_CHANNEL = {
    'length_km': 20.0,
    'attenuation_db_per_km': 0.2,
    'extra_loss_db': 0.0,
}

# Detector 2 runs with its 300 ohm series resistor (tau ~ 40 ns)
DEFAULT_DETECTORS = [
    {
        'eta': 0.775,
        'dark_rate_hz': 10.0,
        'tau_ns': 30.0,
        'kinetic_inductance': None,
        'load_resistance_ohm': 50.0,
        'pileup_floor_ns': 0.0,
        'kappa': None,
    },
    {
        'eta': 0.762,
        'dark_rate_hz': 10.0,
        'tau_ns': 40.0,
        'kinetic_inductance': None,
        'load_resistance_ohm': 350.0,
        'pileup_floor_ns': 40.0,
        'kappa': None,
    },
]

DEFAULT_TIMING = {
    'rep_rate_hz': 5e6,
    'bin_separation_ns': 75.0,
    'pulse_width_ns': 0.5,
}

DEFAULT_RUN_CONFIG = {
    'cycles': DEFAULT_CYCLES,
    'seed': DEFAULT_SEED,
    'workers': 1,
    'sources': [dict(DEFAULT_SOURCE), dict(DEFAULT_SOURCE)],
    'channels': [dict(DEFAULT_CHANNEL), dict(DEFAULT_CHANNEL)],
    'detectors': [dict(d) for d in DEFAULT_DETECTORS],
    'timing': dict(DEFAULT_TIMING),
    # None: uniform over same-basis state pairs and intensity pairs
    'schedule': None,
    'phase_mode': 'random',
    'theta': 0.0,
}
