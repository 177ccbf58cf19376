# -*- coding: utf-8 -*-
"""
Experiment Configuration
Path keys plus a "settings" dict; defaults live in code and are overlaid by the file
"""

import copy
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

try:
    import tomllib
    TOMLLIB_AVAILABLE = True
except ImportError:
    TOMLLIB_AVAILABLE = False

from utils.errors import ConfigError
from utils.geometry import CacheGeometry, GeometryError
from utils.text_io import read_text_file, safe_float, safe_int

logger = logging.getLogger(__name__)

CLASSIFICATION_KEYS = (
    'previction-occurred',
    'prefetch-count',
    'prefetched-address-set',
    'eviction-of-preloaded',
    'misprediction-rate-bucket',
)

DEFAULT_SETTINGS: Dict[str, Any] = {
    'geometry': CacheGeometry().to_dict(),
    'replacement_policy': 'lru',
    'root_seed': 0,
    'classification_key': 'previction-occurred',
    'class_threshold': 0.95,
    'expansion_cap': 1 << 22,
    'shard': '0/1',
    'processes': os.cpu_count() or 1,
    'enable_prefetcher': True,
    'enable_previction': True,
    'store_pins': {},
    'tested_ranges': {},
    'listing_error_threshold': 0.1,
    'log_level': 'INFO',
}

PATH_KEYS = ('gts_path', 'output_dir', 'archive_path')


def parse_shard(spec: str) -> Tuple[int, int]:
    """'k/K' -> (k, K) with 0 <= k < K"""
    try:
        index, total = (int(p) for p in str(spec).split('/'))
    except ValueError:
        raise ConfigError(f"shard must look like 'k/K', got '{spec}'") from None
    if total < 1 or not 0 <= index < total:
        raise ConfigError(f"shard {spec} out of range")
    return index, total


@dataclass
class ExperimentConfig:
    gts_path: str = ""
    output_dir: str = "output"
    archive_path: str = ""
    settings: Dict[str, Any] = field(default_factory=lambda: copy.deepcopy(DEFAULT_SETTINGS))
    source: Optional[Path] = None

    @property
    def geometry(self) -> CacheGeometry:
        try:
            return CacheGeometry.from_dict(self.settings.get('geometry', {}))
        except GeometryError as e:
            raise ConfigError(f"invalid geometry: {e}") from e

    @property
    def shard(self) -> Tuple[int, int]:
        return parse_shard(self.settings.get('shard', '0/1'))

    def validate(self) -> 'ExperimentConfig':
        s = self.settings
        s['root_seed'] = safe_int(s.get('root_seed'), 0)
        s['expansion_cap'] = safe_int(s.get('expansion_cap'), DEFAULT_SETTINGS['expansion_cap'])
        s['processes'] = max(1, safe_int(s.get('processes'), 1))
        s['class_threshold'] = safe_float(s.get('class_threshold'), 0.95)
        s['listing_error_threshold'] = safe_float(s.get('listing_error_threshold'), 0.1)

        if not 0.5 < s['class_threshold'] <= 1.0:
            raise ConfigError(f"class_threshold must be in (0.5, 1], got {s['class_threshold']}")
        if s['classification_key'] not in CLASSIFICATION_KEYS:
            raise ConfigError(f"unknown classification_key '{s['classification_key']}'")
        if str(s['replacement_policy']).lower() not in ('lru', 'fifo', 'random'):
            raise ConfigError(f"unknown replacement_policy '{s['replacement_policy']}'")
        if s['expansion_cap'] < 1:
            raise ConfigError("expansion_cap must be positive")
        self.geometry
        self.shard
        for name, bounds in s.get('tested_ranges', {}).items():
            if len(bounds) != 2 or int(bounds[0]) > int(bounds[1]):
                raise ConfigError(f"tested range for {name} must be [lo, hi]")
        return self

    def resolve(self, value: str) -> Path:
        """Paths in the file are relative to the file's directory"""
        path = Path(value)
        if not path.is_absolute() and self.source is not None:
            path = self.source.parent / path
        return path

    def to_dict(self) -> Dict[str, Any]:
        return {
            'gts_path': self.gts_path,
            'output_dir': self.output_dir,
            'archive_path': self.archive_path,
            'settings': self.settings,
        }


def _read_raw(path: Path) -> Dict[str, Any]:
    text = read_text_file(path)
    if path.suffix.lower() == '.toml':
        if not TOMLLIB_AVAILABLE:
            raise ConfigError("TOML configs need Python 3.11+ (tomllib)")
        return tomllib.loads(text)
    return json.loads(text)


def load_config(path: Optional[Union[str, Path]] = None, overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """Load a JSON or TOML config; missing keys fall back to DEFAULT_SETTINGS"""
    config = ExperimentConfig()

    if path:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            raw = _read_raw(path)
        except (ValueError, OSError) as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e

        for key in PATH_KEYS:
            if key in raw:
                setattr(config, key, str(raw[key]))

        loaded_settings = raw.get('settings', {})
        unknown = sorted(set(loaded_settings) - set(DEFAULT_SETTINGS))
        if unknown:
            logger.warning(f"Ignoring unknown settings: {', '.join(unknown)}")
        config.settings.update({k: v for k, v in loaded_settings.items() if k in DEFAULT_SETTINGS})
        config.source = path.resolve()
        logger.info(f"Configuration loaded from {path}")

    if overrides:
        config.settings.update({k: v for k, v in overrides.items() if v is not None})

    return config.validate()


def save_config(config: ExperimentConfig, path: Union[str, Path]):
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(config.to_dict(), f, indent=2, ensure_ascii=False)
