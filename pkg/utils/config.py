import os
import json


class Config:
    """Application configuration settings"""
    # Application metadata
    APP_NAME = "ModelSetLab"

    # Directory paths
    BASE_DIR = os.path.abspath(os.path.dirname(os.path.dirname(__file__)))
    ASSETS_DIR = os.path.join(BASE_DIR, 'assets')
    CONFIGS_DIR = os.path.join(BASE_DIR, 'configs')
    OUTPUT_DIR = os.path.join(BASE_DIR, 'output')
    EXAMPLES_FILE = os.path.join(ASSETS_DIR, 'examples.json')

    # Load global defaults
    with open(os.path.join(ASSETS_DIR, 'settings.json'), 'r') as f:
        settings = json.loads(f.read())

        lattice = settings['lattice']
        CANDIDATE_BUDGET = lattice['CANDIDATE_BUDGET']
        INJECTIVITY_PROBE_RADIUS = lattice['INJECTIVITY_PROBE_RADIUS']
        INJECTIVITY_PROBE_TOLERANCE = lattice['INJECTIVITY_PROBE_TOLERANCE']
        ENUMERATION_CHUNK_ROWS = lattice['ENUMERATION_CHUNK_ROWS']

        BOUNDARY_TOLERANCE = settings['windows']['BOUNDARY_TOLERANCE']

        autocorrelation = settings['autocorrelation']
        AUTOCORR_BLOCK_ROWS = autocorrelation['AUTOCORR_BLOCK_ROWS']
        VAN_HOVE_RATIO = autocorrelation['VAN_HOVE_RATIO']
        NULL_MEAN_TOLERANCE = autocorrelation['NULL_MEAN_TOLERANCE']
        NULL_MEAN_DECAY_RATIO = autocorrelation['NULL_MEAN_DECAY_RATIO']
        NORM_AP_TOLERANCE = autocorrelation['NORM_AP_TOLERANCE']
        ALMOST_PERIOD_DELTA = autocorrelation['ALMOST_PERIOD_DELTA']
        ALMOST_PERIOD_COUNT = autocorrelation['ALMOST_PERIOD_COUNT']
        PSD_SAMPLE_SIZE = autocorrelation['PSD_SAMPLE_SIZE']
        PSD_SAMPLES = autocorrelation['PSD_SAMPLES']

        diffraction = settings['diffraction']
        INTERNAL_CUTOFF = diffraction['INTERNAL_CUTOFF']
        RESIDUAL_INTERNAL_CUTOFF = diffraction['RESIDUAL_INTERNAL_CUTOFF']
        RESIDUAL_GRID_POINTS = diffraction['RESIDUAL_GRID_POINTS']
        RESIDUAL_BINS = diffraction['RESIDUAL_BINS']
        CERTIFY_RADIUS = diffraction['CERTIFY_RADIUS']
        DUAL_COVERING_RADIUS = diffraction['DUAL_COVERING_RADIUS']
        FREQUENCY_CHUNK = diffraction['FREQUENCY_CHUNK']
        INTENSITY_THRESHOLD_FACTOR = diffraction['INTENSITY_THRESHOLD_FACTOR']
        NOISE_PROBES = diffraction['NOISE_PROBES']
        GUARD_FACTOR = diffraction['GUARD_FACTOR']
        COVERING_GRID_STEPS = diffraction['COVERING_GRID_STEPS']
        CERTIFICATION_SLACK = diffraction['CERTIFICATION_SLACK']
        LIPSCHITZ_HEADROOM = diffraction['LIPSCHITZ_HEADROOM']
        BRAGG_COVERING_BOUND = diffraction['BRAGG_COVERING_BOUND']
        COVERING_STABILITY = diffraction['COVERING_STABILITY']
        RESIDUAL_DECAY_RATIO = diffraction['RESIDUAL_DECAY_RATIO']
        EPSILONS = diffraction['EPSILONS']

        MAX_WORKERS = settings['workers']['MAX_WORKERS']

        # Logging settings
        LOG_FILE = settings['logging']['LOG_FILE']
        LOG_LEVEL = settings['logging']['LOG_LEVEL']

    # Symbolic matrix entries, expanded at parse time
    SYMBOLIC_CONSTANTS = {
        "tau": "1.6180339887498949",
        "sqrt2": "1.4142135623730951",
    }

    @classmethod
    def apply_overrides(cls, overrides):
        """Update settings from a mapping of lower- or upper-case names"""
        aliases = {
            'eta': 'BOUNDARY_TOLERANCE',
            'epsilons': 'EPSILONS',
            'intensity_threshold': 'INTENSITY_THRESHOLD_FACTOR',
            'candidate_budget': 'CANDIDATE_BUDGET',
            'threads': 'MAX_WORKERS',
        }
        applied = {}
        for name, value in (overrides or {}).items():
            attr_name = aliases.get(name, name.upper())
            if not hasattr(cls, attr_name) or attr_name.startswith('_'):
                raise KeyError(name)
            setattr(cls, attr_name, value)
            applied[attr_name] = value
        return applied

    @classmethod
    def snapshot(cls):
        """Return the current upper-case settings as a dict"""
        return {name: getattr(cls, name) for name in dir(cls)
                if name.isupper() and not name.startswith('_')}

    @classmethod
    def restore(cls, snapshot):
        for name, value in snapshot.items():
            setattr(cls, name, value)
