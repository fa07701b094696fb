"""System configuration files.

A config is TOML::

    [space]
    points = ["a", "b"]          # optional labels
    weights = ["1/2", "1/2"]
    map = [1, 0]                 # image index of each point

    [options]
    log_base = "e"               # or "2"
    numeric = "rational"         # or "float"
    tolerance = 1e-9

    [partitions]
    A = [[1, 0], [0, 1]]         # one row per element, one column per point
    B = [["1/2", "1/2"], [0.5, 0.5]]

Values may be integers, decimals or ``"p/q"`` strings.  Decimals are read
from their source text, so ``0.1`` is exactly ``1/10`` in rational mode.
"""

from __future__ import annotations

import hashlib
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError, DomainError
from .mv import EXACT, FLOAT, DynamicalSystem, FiniteSpace, NumericMode, parse_fraction
from .partitions import Partition

NUMERIC_NAMES = {"rational": EXACT, "exact": EXACT, "float": FLOAT}


@dataclass
class SystemConfig:
    point_ids: List[object]
    weights: List[Fraction]
    point_map: List[int]
    partitions: Dict[str, List[List[Fraction]]]
    options: Dict[str, object] = field(default_factory=dict)
    digest: str = ""

    def numeric_mode(self, numeric: Optional[str] = None, tolerance: Optional[float] = None):
        name = numeric or self.options.get("numeric", "rational")
        if name not in NUMERIC_NAMES:
            raise ConfigError(f"options.numeric: unknown mode {name!r}")
        tol = tolerance if tolerance is not None else float(self.options.get("tolerance", 1e-9))
        return NumericMode(NUMERIC_NAMES[name], tol)

    def build(self, numeric: Optional[str] = None, tolerance: Optional[float] = None):
        """Construct the :class:`DynamicalSystem` and named partitions."""
        mode = self.numeric_mode(numeric, tolerance)
        try:
            space = FiniteSpace(tuple(self.point_ids), tuple(self.weights), mode)
        except DomainError as exc:
            raise ConfigError(f"space.weights: {exc}") from exc
        try:
            sys_ = DynamicalSystem.from_map(space, self.point_map)
        except DomainError as exc:
            raise ConfigError(f"space.map: {exc}") from exc
        parts = {}
        for name, rows in self.partitions.items():
            try:
                parts[name] = Partition.from_rows(space, rows)
            except DomainError as exc:
                raise ConfigError(f"partitions.{name}: {exc}") from exc
        return sys_, parts


def _num(value, where) -> Fraction:
    try:
        return parse_fraction(value)
    except DomainError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def parse_config(text: str) -> SystemConfig:
    try:
        raw = tomllib.loads(text, parse_float=str)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config is not valid TOML: {exc}") from exc

    space = raw.get("space")
    if not isinstance(space, dict):
        raise ConfigError("missing [space] table")
    weights_raw = space.get("weights")
    if not isinstance(weights_raw, list) or not weights_raw:
        raise ConfigError("space.weights: expected a nonempty list")
    weights = [_num(w, f"space.weights[{i}]") for i, w in enumerate(weights_raw)]
    n = len(weights)
    for i, w in enumerate(weights):
        if w < 0:
            raise ConfigError(f"space.weights[{i}]: negative weight {w}")

    points = space.get("points", list(range(n)))
    if not isinstance(points, list) or len(points) != n:
        raise ConfigError(f"space.points: expected {n} labels")
    if len(set(map(str, points))) != n:
        raise ConfigError("space.points: labels must be distinct")

    pmap = space.get("map", list(range(n)))
    if not isinstance(pmap, list) or len(pmap) != n:
        raise ConfigError(f"space.map: expected {n} indices")
    for i, j in enumerate(pmap):
        if not isinstance(j, int) or isinstance(j, bool) or not 0 <= j < n:
            raise ConfigError(f"space.map[{i}]: index {j!r} out of range 0..{n - 1}")

    options = raw.get("options", {})
    if not isinstance(options, dict):
        raise ConfigError("[options] must be a table")
    if "log_base" in options and str(options["log_base"]) not in ("e", "2"):
        raise ConfigError(f"options.log_base: expected 'e' or '2', got {options['log_base']!r}")

    tables = raw.get("partitions", {})
    if not isinstance(tables, dict):
        raise ConfigError("[partitions] must be a table")
    parts = {}
    for name, rows in tables.items():
        if not isinstance(rows, list) or not rows:
            raise ConfigError(f"partitions.{name}: expected a nonempty matrix")
        mat = []
        for i, row in enumerate(rows):
            if not isinstance(row, list) or len(row) != n:
                raise ConfigError(f"partitions.{name}[{i}]: expected {n} values")
            vals = [_num(v, f"partitions.{name}[{i}][{w}]") for w, v in enumerate(row)]
            for w, v in enumerate(vals):
                if not 0 <= v <= 1:
                    raise ConfigError(
                        f"partitions.{name}[{i}][{w}]: value {v} outside [0, 1] at point {w}"
                    )
            mat.append(vals)
        parts[str(name)] = mat

    digest = hashlib.sha256(text.encode()).hexdigest()
    return SystemConfig(points, weights, [int(j) for j in pmap], parts, dict(options), digest)


def load_config(path) -> SystemConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)
