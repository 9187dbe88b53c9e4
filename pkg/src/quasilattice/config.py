"""Experiment configuration, run manifests, and artifact round-trips.

A single JSON file drives every pipeline stage.  Defaults are embedded
here and echoed (fully merged) into the run manifest so that any report
is self-describing: the manifest alone states exactly which geometry,
solver knobs, targets, and tolerances produced the artifacts next to it.

Sections
--------
geometry   inner cutoff a, window edge b, outer support l (0 < a < b < l < 1/2)
solver     N (offset half-width), K (frequency cutoff), m (decay order),
           epsilon (perturbation budget), rho (contraction target),
           residualTol, maxIterations, plus fine-grained numeric knobs
targets    named transform prescriptions (one-sided or even bumps)
densities  named test densities given by their transform profiles
probes     testCount, seed, and the tolerance table
outputs    artifact directory and formats
pair       coupling size and separation factor for the verdict pair
positivity level and scan range for the everywhere-positive lift
scan       grid for minimum-value scans

The manifest records a sha256 hash of the canonical (sorted, compact)
encoding of the merged configuration; identical configurations hash
identically regardless of key order in the source file.
"""

from __future__ import annotations

import copy
import dataclasses
import hashlib
import json
import platform
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigurationError, ContractViolation
from .grids import QuadratureGrid
from .perturbation import PerturbedLattice
from .solver import LatticeBuild, SolveDiagnostics, SolverConfig, WindowSpectrum
from .tiling import DensityFunction, ZeroSetDescriptor, make_density
from .windows import BumpComponent, SmoothWindow, SpectralTarget, WindowGeometry

__all__ = [
    "DEFAULT_CONFIG",
    "ExperimentConfig",
    "ProbeSettings",
    "OutputSettings",
    "PairSettings",
    "PositivitySettings",
    "ScanSettings",
    "RunManifest",
    "write_json_artifact",
    "write_columns",
    "save_build",
    "load_build",
]


DEFAULT_CONFIG: dict = {
    "geometry": {"a": 0.15, "b": 0.30, "l": 0.40},
    "solver": {
        "N": 2048,
        "K": 512,
        "m": 2,
        "epsilon": 0.1,
        "rho": 0.5,
        "residualTol": 1e-12,
        "maxIterations": 200,
        "nodeCount": 16384,
        "termDropBudget": 1e-15,
        "alphaZeroTol": 1e-12,
        "transformCheckTol": 1e-6,
        "maxCalibrationHalvings": 24,
    },
    "targets": {
        "window": {"mode": "bump", "support": [0.18, 0.28], "amplitude": 1.0},
        "addendum": {"mode": "even-bump", "support": [-0.135, 0.135], "amplitude": 1.0},
    },
    "densities": {
        "unit-mass": {"mode": "even-bump", "support": [-0.14, 0.14], "amplitude": 1.0},
        "annulus-even": {"components": [[-0.27, -0.19, 1.0], [0.19, 0.27, 1.0]]},
        "off-support-even": {"components": [[-0.175, -0.155, 1.0], [0.155, 0.175, 1.0]]},
    },
    "probes": {
        "testCount": 10,
        "seed": 24301,
        "tolerances": {
            "poisson": 1e-9,
            "window": 1e-5,
            "tiling": 1e-5,
            "tilingOracle": 1e-6,
            "addendum": 1e-6,
            "convolution": 1e-6,
            "positivityTiling": 1e-6,
        },
    },
    "outputs": {"directory": "out", "formats": ["csv", "json"]},
    "pair": {"coupling": 5e-7, "separationFactor": 3.0},
    "positivity": {"level": 1.0, "halfRange": 112},
    "scan": {"lo": -100.0, "hi": 100.0, "step": 0.01},
}

_FREEFORM_SECTIONS = {"targets", "densities"}


def _merge_with_defaults(defaults: dict, override: dict, path: str = "") -> dict:
    """Deep-merge override onto defaults, rejecting unknown keys."""
    merged = copy.deepcopy(defaults)
    for key, value in override.items():
        where = f"{path}.{key}" if path else key
        if key not in defaults:
            raise ConfigurationError(f"unknown configuration key {where!r}")
        if key in _FREEFORM_SECTIONS and not path:
            # named specs: user entries add to or replace defaults name-wise
            if not isinstance(value, dict):
                raise ConfigurationError(f"{where!r} must be a JSON object")
            merged[key] = {**copy.deepcopy(defaults[key]), **copy.deepcopy(value)}
        elif isinstance(defaults[key], dict):
            if not isinstance(value, dict):
                raise ConfigurationError(f"{where!r} must be a JSON object")
            merged[key] = _merge_with_defaults(defaults[key], value, where)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def _require_positive(name: str, value: float) -> float:
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise ConfigurationError(f"{name} must be a positive finite number, got {value}")
    return value


@dataclass(frozen=True)
class ProbeSettings:
    test_count: int
    seed: int
    tolerances: Dict[str, float]

    def tol(self, name: str) -> float:
        try:
            return self.tolerances[name]
        except KeyError:
            raise ConfigurationError(f"no tolerance named {name!r} configured") from None


@dataclass(frozen=True)
class OutputSettings:
    directory: str
    formats: Tuple[str, ...]


@dataclass(frozen=True)
class PairSettings:
    coupling: float
    separation_factor: float


@dataclass(frozen=True)
class PositivitySettings:
    level: float
    half_range: int


@dataclass(frozen=True)
class ScanSettings:
    lo: float
    hi: float
    step: float


def _density_from_spec(
    name: str,
    spec: dict,
    grid: Optional[QuadratureGrid] = None,
) -> DensityFunction:
    """Build a density from a config entry.

    Two shapes are accepted: {"components": [[lo, hi, amp], ...]} for a
    sum of smooth bumps, or {"mode": "even-bump", "support": [-h, h],
    "amplitude": w} for a single symmetric bump of peak value w.
    """
    if "components" in spec:
        raw = spec["components"]
        if not raw:
            raise ConfigurationError(f"density {name!r} has no components")
        comps = [BumpComponent(float(c[0]), float(c[1]), float(c[2])) for c in raw]
    elif spec.get("mode") == "even-bump":
        lo, hi = (float(v) for v in spec["support"])
        if not np.isclose(lo, -hi):
            raise ConfigurationError(f"density {name!r}: even-bump support must be symmetric")
        comps = [BumpComponent(lo, hi, float(spec.get("amplitude", 1.0)))]
    else:
        raise ConfigurationError(
            f"density {name!r} needs either 'components' or mode 'even-bump'"
        )
    support = tuple((c.lo, c.hi) for c in comps)

    def profile(t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for c in comps:
            out += c(t)
        return out

    return make_density(profile, support, name=name, grid=grid)


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated, fully-defaulted experiment description."""

    geometry: WindowGeometry
    solver: SolverConfig
    targets: Dict[str, dict]
    densities: Dict[str, dict]
    probes: ProbeSettings
    outputs: OutputSettings
    pair: PairSettings
    positivity: PositivitySettings
    scan: ScanSettings
    raw: dict = field(repr=False)

    # -- construction -----------------------------------------------------

    @classmethod
    def from_dict(cls, data: Optional[dict] = None) -> "ExperimentConfig":
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigurationError("configuration root must be a JSON object")
        raw = _merge_with_defaults(DEFAULT_CONFIG, data)

        geo = raw["geometry"]
        geometry = WindowGeometry(float(geo["a"]), float(geo["b"]), float(geo["l"]))

        sol = raw["solver"]
        try:
            solver = SolverConfig(
                max_freq=int(sol["K"]),
                half_width=int(sol["N"]),
                node_count=int(sol["nodeCount"]),
                decay_order=int(sol["m"]),
                epsilon=float(sol["epsilon"]),
                contraction_target=float(sol["rho"]),
                residual_tol=float(sol["residualTol"]),
                max_iterations=int(sol["maxIterations"]),
                term_drop_budget=float(sol["termDropBudget"]),
                alpha_zero_tol=float(sol["alphaZeroTol"]),
                transform_check_tol=float(sol["transformCheckTol"]),
                max_calibration_halvings=int(sol["maxCalibrationHalvings"]),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"bad solver settings: {exc}") from exc

        probes_raw = raw["probes"]
        tolerances = {}
        for key, value in probes_raw["tolerances"].items():
            tolerances[key] = _require_positive(f"probes.tolerances.{key}", value)
        test_count = int(probes_raw["testCount"])
        if test_count < 1:
            raise ConfigurationError("probes.testCount must be at least 1")
        seed = int(probes_raw["seed"])
        if not (0 <= seed < 2**64):
            raise ConfigurationError("probes.seed must fit in an unsigned 64-bit integer")
        probes = ProbeSettings(test_count, seed, tolerances)

        out_raw = raw["outputs"]
        formats = tuple(str(f) for f in out_raw["formats"])
        for f in formats:
            if f not in ("csv", "json", "txt"):
                raise ConfigurationError(f"unknown output format {f!r}")
        outputs = OutputSettings(str(out_raw["directory"]), formats)

        pair = PairSettings(
            _require_positive("pair.coupling", raw["pair"]["coupling"]),
            _require_positive("pair.separationFactor", raw["pair"]["separationFactor"]),
        )
        positivity = PositivitySettings(
            float(raw["positivity"]["level"]),
            int(raw["positivity"]["halfRange"]),
        )
        scan_raw = raw["scan"]
        scan = ScanSettings(
            float(scan_raw["lo"]),
            float(scan_raw["hi"]),
            _require_positive("scan.step", scan_raw["step"]),
        )
        if scan.lo >= scan.hi:
            raise ConfigurationError("scan.lo must be below scan.hi")

        cfg = cls(
            geometry=geometry,
            solver=solver,
            targets=dict(raw["targets"]),
            densities=dict(raw["densities"]),
            probes=probes,
            outputs=outputs,
            pair=pair,
            positivity=positivity,
            scan=scan,
            raw=raw,
        )
        # fail fast on malformed target/density specs
        cfg.window_target()
        cfg.addendum_target()
        for name in cfg.densities:
            cfg.density(name)
        return cfg

    @classmethod
    def from_file(cls, path: str) -> "ExperimentConfig":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except FileNotFoundError:
            raise ConfigurationError(f"configuration file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"configuration file is not valid JSON: {exc}") from exc
        return cls.from_dict(data)

    # -- derived objects ---------------------------------------------------

    def window_target(self) -> SpectralTarget:
        spec = self.targets.get("window")
        if spec is None:
            raise ConfigurationError("targets.window is required")
        try:
            target = SpectralTarget.from_json_dict(
                spec, geometry=self.geometry
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError(f"bad targets.window spec: {exc}") from exc
        if target.symmetry_class != "one-sided":
            raise ConfigurationError("targets.window must be a one-sided bump")
        return SpectralTarget(
            target.components,
            "one-sided",
            max_freq=self.solver.max_freq,
            name="window",
        )

    def addendum_target(self) -> SpectralTarget:
        spec = self.targets.get("addendum")
        if spec is None:
            raise ConfigurationError("targets.addendum is required")
        try:
            target = SpectralTarget.from_json_dict(spec)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError(f"bad targets.addendum spec: {exc}") from exc
        if target.symmetry_class != "hermitian-even":
            raise ConfigurationError("targets.addendum must be an even bump")
        hw = max(abs(target.support[0][0]), abs(target.support[-1][1]))
        if hw >= self.geometry.a:
            raise ConfigurationError(
                f"targets.addendum must be supported inside (-a, a) = "
                f"(+-{self.geometry.a}); got half-width {hw}"
            )
        return SpectralTarget(
            target.components,
            "hermitian-even",
            max_freq=self.solver.max_freq,
            name="addendum",
        )

    def density(self, name: str, grid: Optional[QuadratureGrid] = None) -> DensityFunction:
        spec = self.densities.get(name)
        if spec is None:
            raise ConfigurationError(
                f"no density named {name!r}; configured: {sorted(self.densities)}"
            )
        try:
            return _density_from_spec(name, spec, grid=grid)
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise ConfigurationError(f"bad density spec {name!r}: {exc}") from exc

    # -- identity ----------------------------------------------------------

    def canonical_json(self) -> str:
        return json.dumps(self.raw, sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# run manifest


_MANIFEST_NAME = "manifest.json"


@dataclass
class RunManifest:
    """Ledger of one output directory: config echo, stage statuses, artifacts.

    Every file a stage emits must be registered here.  The manifest is the
    only artifact carrying wall-clock timings, so reruns of an identical
    configuration reproduce every other artifact byte for byte.
    """

    config_hash: str
    config: dict
    versions: Dict[str, str]
    template: str
    stages: Dict[str, dict] = field(default_factory=dict)
    artifacts: List[str] = field(default_factory=list)

    @classmethod
    def fresh(cls, config: ExperimentConfig) -> "RunManifest":
        from . import __version__
        from .windows import TEMPLATE_ID

        return cls(
            config_hash=config.config_hash(),
            config=copy.deepcopy(config.raw),
            versions={
                "package": __version__,
                "numpy": np.__version__,
                "python": platform.python_version(),
            },
            template=TEMPLATE_ID,
        )

    @classmethod
    def read(cls, out_dir: Path) -> Optional["RunManifest"]:
        path = Path(out_dir) / _MANIFEST_NAME
        if not path.exists():
            return None
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"unreadable manifest at {path}: {exc}") from exc
        return cls(
            config_hash=data.get("configHash", ""),
            config=data.get("config", {}),
            versions=data.get("versions", {}),
            template=data.get("template", ""),
            stages=data.get("stages", {}),
            artifacts=list(data.get("artifacts", [])),
        )

    @classmethod
    def load_or_fresh(cls, out_dir: Path, config: ExperimentConfig) -> "RunManifest":
        manifest = cls.read(out_dir)
        if manifest is None or manifest.config_hash != config.config_hash():
            # no manifest yet, or a changed config invalidates previous stages
            return cls.fresh(config)
        return manifest

    def record_stage(self, name: str, status: str, seconds: float, files: Sequence[str]) -> None:
        self.stages[name] = {
            "status": status,
            "seconds": float(seconds),
            "files": sorted(files),
        }
        for f in files:
            if f not in self.artifacts:
                self.artifacts.append(f)
        self.artifacts.sort()

    def save(self, out_dir: Path) -> Path:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / _MANIFEST_NAME
        payload = {
            "configHash": self.config_hash,
            "config": self.config,
            "versions": self.versions,
            "template": self.template,
            "stages": self.stages,
            "artifacts": sorted(self.artifacts),
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, sort_keys=True, indent=2)
            fh.write("\n")
        return path


# ---------------------------------------------------------------------------
# artifact IO


def write_json_artifact(path: Path, payload: dict) -> None:
    """Deterministic JSON: sorted keys, two-space indent, trailing newline."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def write_columns(path: Path, columns: Sequence[np.ndarray], header: str = "") -> None:
    """Plot-ready whitespace-separated columns with full-precision floats."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    arrays = [np.asarray(c, dtype=float) for c in columns]
    n = len(arrays[0])
    for arr in arrays:
        if len(arr) != n:
            raise ContractViolation("column lengths differ")
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            fh.write(f"# {header}\n")
        for i in range(n):
            fh.write(" ".join(repr(float(arr[i])) for arr in arrays))
            fh.write("\n")


def _spectrum_payload(build: LatticeBuild) -> dict:
    spec = build.spectrum
    payload = {
        "mass": float(spec.mass),
        "window": [float(spec.window[0]), float(spec.window[1])],
        "support": [[float(lo), float(hi)] for lo, hi in spec.support],
        "description": spec.description,
        "scale": float(build.scale),
        "chainResidual": float(build.chain_residual),
        "geometry": {
            "a": build.geometry.a,
            "b": build.geometry.b,
            "l": build.geometry.l,
        },
    }
    if build.target_json is not None:
        payload["target"] = build.target_json
    if build.probe_value is not None:
        payload["probeValue"] = float(build.probe_value)
    return payload


def save_build(build: LatticeBuild, out_dir: Path, prefix: str = "lattice") -> List[str]:
    """Write lattice CSV, spectrum JSON, and diagnostics JSON; return names."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    names = [f"{prefix}.csv", f"{prefix}_spectrum.json", f"{prefix}_diagnostics.json"]
    build.lattice.to_csv(out_dir / names[0])
    write_json_artifact(out_dir / names[1], _spectrum_payload(build))
    write_json_artifact(out_dir / names[2], build.diagnostics.to_json_dict())
    return names


def _spectrum_from_payload(payload: dict) -> Tuple[WindowSpectrum, WindowGeometry, float, float, Optional[float], Optional[dict]]:
    geo = payload["geometry"]
    geometry = WindowGeometry(float(geo["a"]), float(geo["b"]), float(geo["l"]))
    window = (float(payload["window"][0]), float(payload["window"][1]))
    support = tuple((float(lo), float(hi)) for lo, hi in payload["support"])
    scale = float(payload.get("scale", 1.0))
    chain = float(payload.get("chainResidual", 0.0))
    probe_value = payload.get("probeValue")
    target_json = payload.get("target")
    description = payload.get("description", "")

    profile: Optional[Callable[[np.ndarray], np.ndarray]] = None
    if target_json is not None:
        if "slope" in description:
            # diffraction part -2*pi*i*r*t*psi(t); the stored target is the
            # unit even profile psi, the calibrated scale r sits alongside
            unit = SpectralTarget.from_components_json(target_json)

            def profile(t, _unit=unit, _r=scale):
                t = np.asarray(t, dtype=float)
                return -2j * np.pi * _r * t * _unit(t)

        else:
            target = SpectralTarget.from_components_json(target_json)

            def profile(t, _target=target):
                return _target(np.asarray(t, dtype=float))

    spectrum = WindowSpectrum(
        mass=float(payload["mass"]),
        window=window,
        profile=profile,
        support=support,
        description=description,
    )
    return spectrum, geometry, scale, chain, probe_value, target_json


def load_build(out_dir: Path, prefix: str = "lattice") -> LatticeBuild:
    """Rebuild a LatticeBuild from artifacts written by save_build."""
    out_dir = Path(out_dir)
    lattice_path = out_dir / f"{prefix}.csv"
    spectrum_path = out_dir / f"{prefix}_spectrum.json"
    diag_path = out_dir / f"{prefix}_diagnostics.json"
    for p in (lattice_path, spectrum_path):
        if not p.exists():
            raise ConfigurationError(f"missing artifact {p}; run the solve stage first")
    lattice = PerturbedLattice.from_csv(lattice_path)
    with open(spectrum_path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    spectrum, geometry, scale, chain, probe_value, target_json = _spectrum_from_payload(payload)

    if diag_path.exists():
        with open(diag_path, "r", encoding="utf-8") as fh:
            dd = json.load(fh)
        diagnostics = SolveDiagnostics(
            iterations=int(dd["iterations"]),
            converged=bool(dd["converged"]),
            residual_history=[float(v) for v in dd["residualHistory"]],
            final_residual=float(dd["finalResidual"]),
            empirical_lipschitz=float(dd["empiricalLipschitz"]),
            ball_ratio=float(dd["ballRatio"]),
            alpha_sup=float(dd["alphaSup"]),
            imag_residue=float(dd["imagResidue"]),
            dropped_alpha_mass=float(dd["droppedAlphaMass"]),
            operator_tail=float(dd["operatorTail"]),
            prescription_norm=float(dd["prescriptionNorm"]),
            transform_residual=float(dd["transformResidual"]),
        )
    else:
        diagnostics = SolveDiagnostics(
            iterations=0,
            converged=True,
            residual_history=[],
            final_residual=0.0,
            empirical_lipschitz=0.0,
            ball_ratio=0.0,
            alpha_sup=lattice.offsets.sup_norm,
            imag_residue=0.0,
            dropped_alpha_mass=0.0,
            operator_tail=0.0,
            prescription_norm=0.0,
            transform_residual=0.0,
        )

    return LatticeBuild(
        lattice=lattice,
        spectrum=spectrum,
        diagnostics=diagnostics,
        geometry=geometry,
        scale=scale,
        chain_residual=chain,
        probe_value=probe_value,
        target_json=target_json,
    )
