"""Experiment configuration: INI sections parsed into a frozen dataclass.

The file format is flat key = value under named sections; every numeric
tolerance used by verification lives in [tolerances] and falls back to the
documented defaults below.  Validation errors always name the offending
section and key.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from .errors import ConfigError

# defaults echoed by the verification report; keys are check names
VERIFY_TOLERANCES: Dict[str, float] = {
    "data_symmetry": 1e-9,
    "pencil_identity": 1e-9,
    "hermite_f": 1e-8,
    "hermite_df": 1e-5,
    "orthonormality": 1e-10,
    "tridiagonality": 1e-10,
    "rhs_tail": 1e-10,
    "grid_operator": 1e-8,
    "grid_boundary": 1e-8,
    "grid_coefficient": 1e-8,
    "grid_identity": 1e-10,
    "cf_match": 1e-10,
    "basis_distance": 0.05,
    "exactness": 1e-6,
}

MEDIUM_KINDS_1D = {
    "zero": (),
    "constant": ("value",),
    "piecewise_cubic": (),  # amplitude, rise, peak, fall all optional
    "gaussian": ("amplitude", "center", "width"),
    "file": ("path",),
}
MEDIUM_KINDS_2D = {
    "zero": (),
    "constant": ("value",),
    "gaussian_bumps": ("centers", "widths", "amplitudes"),
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description; see parse_config for the file schema."""

    dimension: int
    output: str
    seed: int
    right_bc: str
    b: Tuple[float, ...]
    lam: Tuple[float, ...]
    data_cells: int
    reference_cells: int
    medium_kind: str
    medium_params: Dict[str, str]
    reference_kind: str
    reference_params: Dict[str, str]
    per_side: int
    strip_width: float
    conditioning_tol: float
    deflation_tol: float
    mask_layers: Optional[int]
    rel_floor: float
    tolerances: Dict[str, float] = field(default_factory=dict)


def geometric_midpoints(b: Tuple[float, ...]) -> Tuple[float, ...]:
    """Geometric midpoints of adjacent spectral points."""
    arr = np.asarray(b, dtype=float)
    return tuple(float(v) for v in np.sqrt(arr[:-1] * arr[1:]))


def default_lambda_list(b: Tuple[float, ...]) -> Tuple[float, ...]:
    """Data points plus their geometric midpoints, sorted."""
    return tuple(sorted(set(b) | set(geometric_midpoints(b))))


def _floats(raw: str, where: str) -> Tuple[float, ...]:
    try:
        vals = tuple(float(tok) for tok in raw.replace(",", " ").split())
    except ValueError as exc:
        raise ConfigError(f"{where}: expected a list of numbers, got {raw!r}") from exc
    if not vals:
        raise ConfigError(f"{where}: list is empty")
    return vals


def _get(cp: configparser.ConfigParser, section: str, key: str, default=None):
    if cp.has_option(section, key):
        return cp.get(section, key)
    return default


def parse_config(path: str) -> ExperimentConfig:
    """Parse and validate an experiment INI file.

    Sections: [experiment] dimension/output/seed/right_bc, [spectral] b and
    optional lambda, [mesh] data_cells/reference_cells, [medium] and
    [reference] kind plus kind parameters, [sources] per_side/strip_width
    (2D), [tolerances] conditioning/deflation plus any VERIFY_TOLERANCES
    key, [mask] layers/rel_floor.
    """
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"config file {path} failed to parse: {exc}") from exc

    raw_dim = _get(cp, "experiment", "dimension")
    if raw_dim is None:
        raise ConfigError("[experiment] dimension is required (1 or 2)")
    try:
        dimension = int(raw_dim)
    except ValueError as exc:
        raise ConfigError(f"[experiment] dimension must be 1 or 2, got {raw_dim!r}") from exc
    if dimension not in (1, 2):
        raise ConfigError(f"[experiment] dimension must be 1 or 2, got {dimension}")

    output = _get(cp, "experiment", "output", "out")
    raw_seed = _get(cp, "experiment", "seed", "0")
    try:
        seed = int(raw_seed)
    except ValueError as exc:
        raise ConfigError(f"[experiment] seed must be an integer, got {raw_seed!r}") from exc

    right_bc = _get(cp, "experiment", "right_bc", "dirichlet").strip().lower()
    if right_bc not in ("dirichlet", "neumann"):
        raise ConfigError(
            f"[experiment] right_bc must be dirichlet or neumann, got {right_bc!r}"
        )

    raw_b = _get(cp, "spectral", "b")
    if raw_b is None:
        raise ConfigError("[spectral] b is required")
    b = _floats(raw_b, "[spectral] b")
    if any(v <= 0 for v in b):
        raise ConfigError("[spectral] b: spectral points must be positive")
    if len(set(b)) != len(b):
        raise ConfigError(
            "[spectral] b: spectral points must be pairwise distinct (the "
            "Loewner divided differences divide by b_i - b_j)"
        )
    if list(b) != sorted(b):
        raise ConfigError("[spectral] b: spectral points must be strictly increasing")

    raw_lam = _get(cp, "spectral", "lambda")
    lam = _floats(raw_lam, "[spectral] lambda") if raw_lam is not None else default_lambda_list(b)
    if any(v <= 0 for v in lam):
        raise ConfigError("[spectral] lambda: evaluation points must be positive")

    def _cells(key: str) -> int:
        raw = _get(cp, "mesh", key)
        if raw is None:
            raise ConfigError(f"[mesh] {key} is required")
        try:
            val = int(raw)
        except ValueError as exc:
            raise ConfigError(f"[mesh] {key} must be an integer, got {raw!r}") from exc
        if val < 2:
            raise ConfigError(f"[mesh] {key} must be at least 2, got {val}")
        return val

    data_cells = _cells("data_cells")
    reference_cells = _cells("reference_cells")
    if data_cells <= reference_cells:
        raise ConfigError(
            "[mesh] data_cells must exceed reference_cells: data generation "
            "runs on a strictly finer mesh than the reference basis to avoid "
            "an inverse crime"
        )

    kinds = MEDIUM_KINDS_1D if dimension == 1 else MEDIUM_KINDS_2D

    def _medium(section: str, default_kind: Optional[str]) -> Tuple[str, Dict[str, str]]:
        kind = _get(cp, section, "kind", default_kind)
        if kind is None:
            raise ConfigError(f"[{section}] kind is required")
        kind = kind.strip().lower()
        if kind not in kinds:
            raise ConfigError(
                f"[{section}] kind must be one of {sorted(kinds)}, got {kind!r}"
            )
        params = {
            k: v for k, v in (cp.items(section) if cp.has_section(section) else [])
            if k != "kind"
        }
        for required in kinds[kind]:
            if required not in params:
                raise ConfigError(f"[{section}] {required} is required for kind {kind}")
        return kind, params

    medium_kind, medium_params = _medium("medium", None)
    reference_kind, reference_params = _medium("reference", "zero")

    raw_ps = _get(cp, "sources", "per_side", "2")
    try:
        per_side = int(raw_ps)
    except ValueError as exc:
        raise ConfigError(f"[sources] per_side must be an integer, got {raw_ps!r}") from exc
    if per_side < 1:
        raise ConfigError(f"[sources] per_side must be positive, got {per_side}")
    raw_sw = _get(cp, "sources", "strip_width", "0.25")
    try:
        strip_width = float(raw_sw)
    except ValueError as exc:
        raise ConfigError(f"[sources] strip_width must be a number, got {raw_sw!r}") from exc
    if not 0 < strip_width <= 1.0 / per_side:
        raise ConfigError(
            f"[sources] strip_width must lie in (0, 1/per_side], got {strip_width}"
        )

    def _tol(key: str, default: float) -> float:
        raw = _get(cp, "tolerances", key)
        if raw is None:
            return default
        try:
            val = float(raw)
        except ValueError as exc:
            raise ConfigError(f"[tolerances] {key} must be a number, got {raw!r}") from exc
        if not (val > 0 and np.isfinite(val)):
            raise ConfigError(f"[tolerances] {key} must be positive and finite, got {val}")
        return val

    conditioning_tol = _tol("conditioning", 1e-12)
    deflation_tol = _tol("deflation", 1e-10)
    tolerances = {name: _tol(name, default) for name, default in VERIFY_TOLERANCES.items()}

    if cp.has_section("tolerances"):
        known = set(VERIFY_TOLERANCES) | {"conditioning", "deflation"}
        for key, _ in cp.items("tolerances"):
            if key not in known:
                raise ConfigError(f"[tolerances] unknown tolerance {key!r}")

    raw_layers = _get(cp, "mask", "layers")
    if raw_layers is None:
        mask_layers = None
    else:
        try:
            mask_layers = int(raw_layers)
        except ValueError as exc:
            raise ConfigError(f"[mask] layers must be an integer, got {raw_layers!r}") from exc
        if mask_layers < 0:
            raise ConfigError(f"[mask] layers must be nonnegative, got {mask_layers}")
    raw_rf = _get(cp, "mask", "rel_floor", "0.05")
    try:
        rel_floor = float(raw_rf)
    except ValueError as exc:
        raise ConfigError(f"[mask] rel_floor must be a number, got {raw_rf!r}") from exc
    if not 0 <= rel_floor < 1:
        raise ConfigError(f"[mask] rel_floor must lie in [0, 1), got {rel_floor}")

    return ExperimentConfig(
        dimension=dimension,
        output=output,
        seed=seed,
        right_bc=right_bc,
        b=b,
        lam=lam,
        data_cells=data_cells,
        reference_cells=reference_cells,
        medium_kind=medium_kind,
        medium_params=medium_params,
        reference_kind=reference_kind,
        reference_params=reference_params,
        per_side=per_side,
        strip_width=strip_width,
        conditioning_tol=conditioning_tol,
        deflation_tol=deflation_tol,
        mask_layers=mask_layers,
        rel_floor=rel_floor,
        tolerances=tolerances,
    )
