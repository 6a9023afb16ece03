"""
Experiment configuration files.

An experiment is a JSON document:

    {
      "name": "fibonacci_full",
      "scheme": {"example": "fibonacci"}          or {"matrix": [...], "d": 1, "m": 1},
      "window": {"boxes": [[[0, 1]]]},            optional for examples
      "region": {"radii": [250, 500, 1000]}       or {"geometric": {"start": 250, "ratio": 2, "count": 6}},
      "comb": {"weight_model": "unit"},           unit | tent | complex_phase | bernoulli | dominating
      "diffraction": {"freq_box": [[0, 20]]},
      "tasks": ["points", "autocorr", "decompose", "diffract", "verify", "fixtures"],
      "output": "output/fibonacci_full",
      "seed": 42,
      "thresholds": {"eta": 1e-9, "epsilons": [0.1, 0.5]}
    }
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple
import json
import logging
import os

from utils.config import Config
from cps.autocorrelation import OracleKind
from cps.combs import (InternalWeight, PointSetPatch, WeightedComb, comb_bernoulli, comb_from_internal_weight,
                       dominating_comb, unit_comb)
from cps.errors import ConfigError
from cps.geometry import Box
from cps.scheme import SchemeBasis
from cps.windows import WindowUnion
from data.catalog import Catalog, parse_matrix, parse_scalar, parse_window

logger = logging.getLogger(__name__)

TASKS = ("points", "autocorr", "decompose", "diffract", "verify", "fixtures")
WEIGHT_MODELS = ("unit", "tent", "complex_phase", "bernoulli", "dominating")
SCHEME_TASKS = ("points", "autocorr", "decompose", "diffract", "verify")


@dataclass
class CombSpec:
    """How weights are put on the model-set patch"""
    weight_model: str = "unit"
    p: float = 0.5
    center: Tuple[float, ...] = ()
    halfwidth: Tuple[float, ...] = ()
    theta: Tuple[float, ...] = ()
    outer: Optional[WindowUnion] = None

    def build(self, patch: PointSetPatch, seed: int) -> WeightedComb:
        if self.weight_model == "unit":
            return unit_comb(patch)
        if self.weight_model == "bernoulli":
            return comb_bernoulli(patch, self.p, seed)
        if self.weight_model == "dominating":
            return dominating_comb(patch, self.outer)
        return comb_from_internal_weight(patch, self.internal_weight())

    def internal_weight(self) -> InternalWeight:
        if self.weight_model == "tent":
            return InternalWeight.tent(self.center, self.halfwidth)
        if self.weight_model == "complex_phase":
            return InternalWeight.complex_phase(self.theta)
        return InternalWeight.indicator()

    def oracle(self, comb: WeightedComb) -> OracleKind:
        """Oracle matching the comb this spec builds"""
        if self.weight_model == "unit":
            return OracleKind.full_modelset()
        if self.weight_model == "bernoulli":
            return OracleKind.bernoulli(self.p)
        if self.weight_model == "dominating":
            return OracleKind.internal_function(comb.internal_weight)
        return OracleKind.internal_function(self.internal_weight())


@dataclass
class ExperimentConfig:
    name: str
    scheme: Optional[SchemeBasis]
    window: Optional[WindowUnion]
    radii: Tuple[float, ...]
    extent: float
    comb: CombSpec
    tasks: List[str]
    output: str
    seed: int
    thresholds: Dict[str, object] = field(default_factory=dict)
    freq_box: Optional[Box] = None
    residual_box: Optional[Box] = None
    path: str = ""

    @property
    def R(self) -> float:
        return self.radii[-1] if self.radii else 0.0

    @property
    def region(self) -> Box:
        return Box.centered(self.extent * self.R, self.scheme.d)


def _require(block: dict, key: str, field: str):
    if key not in block:
        raise ConfigError(f"{field}: missing")
    return block[key]


def _parse_radii(region: dict) -> Tuple[float, ...]:
    if 'radii' in region:
        radii = region['radii']
        if not isinstance(radii, list) or not radii:
            raise ConfigError("radii: expected a nonempty list")
        radii = tuple(parse_scalar(r, "radii") for r in radii)
    elif 'geometric' in region:
        geo = region['geometric']
        start = parse_scalar(_require(geo, 'start', 'region.geometric.start'), 'radii')
        ratio = parse_scalar(geo.get('ratio', Config.VAN_HOVE_RATIO), 'radii')
        count = int(_require(geo, 'count', 'region.geometric.count'))
        radii = tuple(start * ratio ** n for n in range(count))
    else:
        raise ConfigError("radii: region needs 'radii' or 'geometric'")
    if radii[0] <= 0 or any(b <= a for a, b in zip(radii[:-1], radii[1:])):
        raise ConfigError(f"radii: must be positive and strictly increasing, got {list(radii)}")
    return radii


def _parse_box(pairs, field: str, d: int) -> Box:
    if not isinstance(pairs, list) or len(pairs) != d:
        raise ConfigError(f"{field}: expected {d} [lo, hi] pairs")
    return Box(tuple(parse_scalar(p[0], field) for p in pairs), tuple(parse_scalar(p[1], field) for p in pairs))


def _parse_comb(block: dict, eta: float) -> CombSpec:
    model = block.get('weight_model', 'unit')
    if model not in WEIGHT_MODELS:
        raise ConfigError(f"comb.weight_model: unknown model '{model}' (expected one of {', '.join(WEIGHT_MODELS)})")
    spec = CombSpec(weight_model=model)
    if model == "bernoulli":
        spec.p = parse_scalar(block.get('p', 0.5), 'comb.p')
        if not 0.0 <= spec.p <= 1.0:
            raise ConfigError(f"comb.p: must lie in [0, 1], got {spec.p}")
    if model == "tent":
        spec.center = tuple(parse_scalar(v, 'comb.center') for v in _require(block, 'center', 'comb.center'))
        spec.halfwidth = tuple(parse_scalar(v, 'comb.halfwidth') for v in _require(block, 'halfwidth', 'comb.halfwidth'))
        if any(h <= 0 for h in spec.halfwidth):
            raise ConfigError("comb.halfwidth: must be positive")
    if model == "complex_phase":
        spec.theta = tuple(parse_scalar(v, 'comb.theta') for v in _require(block, 'theta', 'comb.theta'))
    if model == "dominating":
        spec.outer = parse_window(_require(block, 'outer', 'comb.outer'), field='comb.outer', eta=eta, descriptor="U")
    return spec


def load_experiment(path: str, catalog: Catalog = None, overrides: dict = None) -> ExperimentConfig:
    """
    Parse and validate an experiment file. Thresholds are applied to Config,
    then overrides on top of them, before any window is built.

    Raises:
        ConfigError: naming the offending field.
    """
    try:
        with open(path, 'r') as f:
            raw = json.load(f)
    except FileNotFoundError:
        raise ConfigError(f"config: file not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"config: invalid JSON in {path}: {e}")
    config = parse_experiment(raw, catalog=catalog, overrides=overrides)
    config.path = path
    return config


def parse_experiment(raw: dict, catalog: Catalog = None, overrides: dict = None) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config: expected a JSON object")

    thresholds = raw.get('thresholds', {}) or {}
    try:
        Config.apply_overrides(thresholds)
    except KeyError as e:
        raise ConfigError(f"thresholds.{e.args[0]}: unknown threshold")
    Config.apply_overrides(overrides or {})

    tasks = raw.get('tasks', ['verify'])
    if not isinstance(tasks, list) or not tasks:
        raise ConfigError("tasks: expected a nonempty list")
    for task in tasks:
        if task not in TASKS:
            raise ConfigError(f"tasks: unknown task '{task}' (expected one of {', '.join(TASKS)})")
    if len(set(tasks)) != len(tasks):
        raise ConfigError("tasks: each task may appear only once")

    name = raw.get('name', 'experiment')
    eta = Config.BOUNDARY_TOLERANCE
    scheme, window, radii, extent = None, None, (), 1.0
    freq_box = residual_box = None
    needs_scheme = any(t in SCHEME_TASKS for t in tasks)

    if needs_scheme:
        block = _require(raw, 'scheme', 'scheme')
        if 'example' in block:
            catalog = catalog or Catalog()
            scheme = catalog.get_scheme(block['example'])
            window = catalog.get_window(block['example'], eta=eta)
        else:
            d = int(_require(block, 'd', 'scheme.d'))
            m = int(_require(block, 'm', 'scheme.m'))
            scheme = parse_matrix(_require(block, 'matrix', 'scheme.matrix'), d, m, name)

        if 'window' in raw:
            window = parse_window(_require(raw['window'], 'boxes', 'window.boxes'), field='window.boxes',
                                  eta=eta, descriptor="W")
        if window is None:
            raise ConfigError("window: missing")
        if window.dim != scheme.m:
            raise ConfigError(f"window: dimension {window.dim} does not match scheme internal dimension {scheme.m}")

        region = _require(raw, 'region', 'region')
        radii = _parse_radii(region)
        extent = parse_scalar(region.get('extent', 1.0), 'region.extent')
        if extent < 1.0:
            raise ConfigError("region.extent: must be at least 1")
        if 'decompose' in tasks and len(radii) < 3:
            raise ConfigError("radii: decompose needs at least 3 radii")

        diffraction = raw.get('diffraction', {})
        default_box = [[0, 20]] * scheme.d
        freq_box = _parse_box(diffraction.get('freq_box', default_box), 'diffraction.freq_box', scheme.d)
        residual_box = _parse_box(diffraction.get('residual_box', diffraction.get('freq_box', default_box)),
                                  'diffraction.residual_box', scheme.d)

    comb = _parse_comb(raw.get('comb', {}), eta)
    seed = raw.get('seed', 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ConfigError(f"seed: expected a nonnegative integer, got {seed!r}")
    output = raw.get('output') or os.path.join(Config.OUTPUT_DIR, name)

    logger.info(f"Experiment '{name}': tasks {tasks}, radii {list(radii)}")
    return ExperimentConfig(name=name, scheme=scheme, window=window, radii=radii, extent=extent, comb=comb,
                            tasks=list(tasks), output=output, seed=seed, thresholds=dict(thresholds),
                            freq_box=freq_box, residual_box=residual_box)
