"""Command line driver for the perturbed-lattice pipeline.

Subcommands
-----------
solve       calibrate and solve for the window lattice; writes lattice CSV,
            spectrum JSON, and solver diagnostics
tile        evaluate translate sums of a named density over a solved lattice
            by two independent routes and report the verdict
addendum    build the level-zero lattice and run its three checks: an
            annulus-supported density tiles at level zero, a unit-mass
            density does not tile, and the transform probe matches the
            predicted diffraction profile
positivity  construct the everywhere-positive verdict pair at a given level
            and scan both members for positivity
probe       run the certificate suite against a lattice file: transform
            pairing identities, window-spectrum checks, the smoothing
            identity, and the kernel-bound sweeps
report      consolidate recorded artifacts into a human-readable summary
            plus plot-ready two-column data files

Exit codes: 0 all checks passed, 2 configuration error, 3 numeric check
failed, 4 inconclusive (truncation budgets too large to decide).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import (
    ExperimentConfig,
    RunManifest,
    load_build,
    save_build,
    write_columns,
    write_json_artifact,
)
from .errors import (
    CalibrationError,
    ConfigurationError,
    ConstructionError,
    ContractViolation,
    ConvergenceError,
)
from .grids import QuadratureGrid
from .perturbation import PerturbedLattice
from .solver import LatticeBuild, addendum_lattice, calibrated_window_lattice
from .tiling import (
    ScanReport,
    assess_tiling,
    construct_pair,
    positive_pair,
)
from .probes import (
    addendum_spectrum_probe,
    convolution_transform_check,
    lemma_bound_suite,
    make_test_family,
    poisson_check,
    verify_window_spectrum,
)
from .windows import SmoothWindow

__all__ = ["main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_INCONCLUSIVE = 4

_STAGE_ORDER = ("solve", "tile", "addendum", "positivity", "probe", "report")

# which tolerance --tol overrides, per subcommand
_TOL_TARGET = {
    "solve": ("solver", "transformCheckTol"),
    "tile": ("probes", "tolerances", "tiling"),
    "addendum": ("probes", "tolerances", "addendum"),
    "positivity": ("probes", "tolerances", "positivityTiling"),
    "probe": ("probes", "tolerances", "window"),
}


def _set_path(data: dict, path: Tuple[str, ...], value) -> None:
    node = data
    for key in path[:-1]:
        node = node.setdefault(key, {})
        if not isinstance(node, dict):
            raise ConfigurationError(f"configuration key {key!r} must be an object")
    node[path[-1]] = value


def _load_config(args) -> ExperimentConfig:
    if args.config is not None:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except FileNotFoundError:
            raise ConfigurationError(f"configuration file not found: {args.config}") from None
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"configuration file is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigurationError("configuration root must be a JSON object")
    else:
        data = {}
    if getattr(args, "seed", None) is not None:
        _set_path(data, ("probes", "seed"), int(args.seed))
    tol = getattr(args, "tol", None)
    if tol is not None:
        target = _TOL_TARGET.get(args.command)
        if target is not None:
            _set_path(data, target, float(tol))
    return ExperimentConfig.from_dict(data)


# ---------------------------------------------------------------------------
# small IO helpers


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence[float]]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) for v in row])


def _density_grid(config: ExperimentConfig) -> QuadratureGrid:
    # densities get a finer grid than the default so wide scans stay honest
    return QuadratureGrid.uniform_grid(1 << 13)


def _window_build(config: ExperimentConfig, out_dir: Path) -> Tuple[LatticeBuild, List[str]]:
    """Load the solved window lattice from out_dir, or build and save it."""
    try:
        return load_build(out_dir, "lattice"), []
    except ConfigurationError:
        build = calibrated_window_lattice(
            config.window_target(), config.geometry, config.solver
        )
        files = save_build(build, out_dir, prefix="lattice")
        return build, files


def _swap_lattice(build: LatticeBuild, lattice_path: str) -> LatticeBuild:
    """Replace the lattice points with the contents of a CSV file."""
    lattice = PerturbedLattice.from_csv(lattice_path)
    return LatticeBuild(
        lattice=lattice,
        spectrum=build.spectrum,
        diagnostics=build.diagnostics,
        geometry=build.geometry,
        scale=build.scale,
        chain_residual=build.chain_residual,
        probe_value=build.probe_value,
        target_json=build.target_json,
    )


# ---------------------------------------------------------------------------
# stage workers: each returns (exit_code, files_written, stdout_lines)


def cmd_solve(config: ExperimentConfig, out_dir: Path, args) -> Tuple[int, List[str], List[str]]:
    build = calibrated_window_lattice(config.window_target(), config.geometry, config.solver)
    files = save_build(build, out_dir, prefix="lattice")
    diag = build.diagnostics
    lines = [
        f"solve: converged in {diag.iterations} iterations, "
        f"residual {diag.final_residual:.3e}",
        f"solve: prescription scale {float(build.scale)!r}, "
        f"offset sup {diag.alpha_sup:.3e}, contraction probe {build.probe_value}",
        f"solve: transform residual on window {diag.transform_residual:.3e}, "
        f"chain residual {build.chain_residual:.3e}",
    ]
    return EXIT_OK, files, lines


def _verdict_exit(verdict: str) -> int:
    return EXIT_OK if verdict in ("tiles", "does-not-tile") else EXIT_INCONCLUSIVE


def cmd_tile(config: ExperimentConfig, out_dir: Path, args) -> Tuple[int, List[str], List[str]]:
    build, files = _window_build(config, out_dir)
    if getattr(args, "lattice", None):
        build = _swap_lattice(build, args.lattice)
    name = getattr(args, "density", None) or "unit-mass"
    density = config.density(name, grid=_density_grid(config))
    tol = config.probes.tol("tiling")
    oracle_tol = config.probes.tol("tilingOracle")
    report = assess_tiling(density, build, tol=tol, oracle_tol=oracle_tol)

    safe = name.replace("/", "-")
    report_name = f"tiling_{safe}.json"
    write_json_artifact(out_dir / report_name, report.to_json_dict())
    files = files + [report_name]
    if "csv" in config.outputs.formats:
        from .tiling import default_sample_points, translate_sum_direct, translate_sum_spectral

        xs = default_sample_points()
        direct = translate_sum_direct(density, build.lattice, xs)
        spectral = translate_sum_spectral(density, build.spectrum, xs)
        samples_name = f"tiling_{safe}_samples.csv"
        _write_csv(
            out_dir / samples_name,
            ["x", "directSum", "spectralSum"],
            np.column_stack([xs, direct.values, spectral.values]),
        )
        files.append(samples_name)

    lines = [
        f"tile[{name}]: verdict {report.verdict}, level {float(report.level)!r}",
        f"tile[{name}]: sup deviation {report.sup_deviation:.3e} (tol {tol:.1e}), "
        f"route gap {report.route_gap:.3e}, tail budget {report.tail_budget:.3e}",
    ]
    return _verdict_exit(report.verdict), files, lines


def cmd_addendum(config: ExperimentConfig, out_dir: Path, args) -> Tuple[int, List[str], List[str]]:
    tol_add = config.probes.tol("addendum")
    tol_tile = config.probes.tol("tiling")
    oracle_tol = config.probes.tol("tilingOracle")

    build = addendum_lattice(config.addendum_target(), config.geometry, config.solver)
    files = save_build(build, out_dir, prefix="addendum")
    grid = _density_grid(config)

    annulus = config.density("annulus-even", grid=grid)
    unit_mass = config.density("unit-mass", grid=grid)

    annulus_report = assess_tiling(annulus, build, tol=tol_tile, oracle_tol=oracle_tol)
    level_ok = abs(annulus_report.level) <= tol_add
    annulus_ok = annulus_report.verdict == "tiles" and level_ok

    unit_report = assess_tiling(unit_mass, build, tol=tol_tile, oracle_tol=oracle_tol)
    unit_ok = unit_report.verdict == "does-not-tile"

    probe = addendum_spectrum_probe(build, tol=tol_add)

    failing = []
    if not annulus_ok:
        failing.append("annulus-density-tiles-at-level-zero")
    if not unit_ok:
        failing.append("unit-mass-density-does-not-tile")
    if not probe.passed:
        failing.append("transform-probe-matches-slope-profile")

    payload = {
        "latticeScale": float(build.scale),
        "annulusTiling": annulus_report.to_json_dict(),
        "annulusLevelWithinTol": bool(level_ok),
        "unitMassTiling": unit_report.to_json_dict(),
        "spectrumProbe": probe.to_json_dict(),
        "failing": failing,
        "passed": not failing,
    }
    report_name = "addendum_report.json"
    write_json_artifact(out_dir / report_name, payload)
    files.append(report_name)

    lines = [
        f"addendum: slope scale {float(build.scale)!r}, "
        f"chain residual {build.chain_residual:.3e}",
        f"addendum: annulus density verdict {annulus_report.verdict}, "
        f"level {float(annulus_report.level)!r}",
        f"addendum: unit-mass density verdict {unit_report.verdict}, "
        f"best-level deviation {unit_report.best_level_deviation:.3e}",
        f"addendum: transform probe residual {probe.residual:.3e} "
        f"(delta fit {probe.delta_fit:.3e}, passed {probe.passed})",
    ]
    if failing:
        lines.append(f"addendum: FAILED checks: {', '.join(failing)}")
        inconclusive = (
            annulus_report.verdict == "inconclusive"
            or unit_report.verdict == "inconclusive"
        )
        code = EXIT_INCONCLUSIVE if inconclusive and probe.passed else EXIT_NUMERIC
        return code, files, lines
    lines.append("addendum: all three checks passed")
    return EXIT_OK, files, lines


def cmd_positivity(config: ExperimentConfig, out_dir: Path, args) -> Tuple[int, List[str], List[str]]:
    level = getattr(args, "level", None)
    if level is None:
        level = config.positivity.level
    level = float(level)
    if not np.isfinite(level) or level <= 0:
        raise ConfigurationError(f"positivity level must be positive, got {level}")

    build, files = _window_build(config, out_dir)
    tol_pair = config.probes.tol("tiling")
    tol_pos = config.probes.tol("positivityTiling")
    grid = _density_grid(config)

    pair = construct_pair(
        build,
        tol=tol_pair,
        coupling=config.pair.coupling,
        separation_factor=config.pair.separation_factor,
    )
    lifted = positive_pair(
        pair, build, level=level, half_range=config.positivity.half_range, grid=grid
    )

    tiling_report = assess_tiling(
        lifted.tiling, build, tol=tol_pos, oracle_tol=config.probes.tol("tilingOracle")
    )
    failing_report = assess_tiling(
        lifted.failing, build, tol=tol_pos, oracle_tol=config.probes.tol("tilingOracle")
    )

    scan = config.scan
    xs = np.arange(scan.lo, scan.hi + 0.5 * scan.step, scan.step)
    vals_t = lifted.tiling.values(xs)
    vals_f = lifted.failing.values(xs)

    def scan_report(vals: np.ndarray, name: str) -> ScanReport:
        i = int(np.argmin(vals))
        return ScanReport(
            min_value=float(vals[i]),
            argmin=float(xs[i]),
            max_value=float(np.max(vals)),
            lo=scan.lo,
            hi=scan.hi,
            step=scan.step,
            sample_count=int(xs.size),
            density_name=name,
        )

    scan_t = scan_report(vals_t, lifted.tiling.name)
    scan_f = scan_report(vals_f, lifted.failing.name)

    checks = {
        "tilingMemberTiles": tiling_report.verdict == "tiles",
        "failingMemberDoesNotTile": failing_report.verdict == "does-not-tile",
        "tilingMemberPositive": scan_t.min_value > 0,
        "failingMemberPositive": scan_f.min_value > 0,
        "certifiedFloorPositive": lifted.floor_estimate > 0,
    }
    failing = sorted(k for k, ok in checks.items() if not ok)

    payload = {
        "level": level,
        "pair": lifted.to_json_dict(),
        "tilingVerdict": tiling_report.to_json_dict(),
        "failingVerdict": failing_report.to_json_dict(),
        "scanTiling": scan_t.to_json_dict(),
        "scanFailing": scan_f.to_json_dict(),
        "checks": checks,
        "failing": failing,
        "passed": not failing,
    }
    report_name = "positivity_report.json"
    write_json_artifact(out_dir / report_name, payload)
    files = files + [report_name]

    if "csv" in config.outputs.formats:
        scan_name = "positivity_scan.csv"
        _write_csv(
            out_dir / scan_name,
            ["x", "tilingMember", "failingMember"],
            np.column_stack([xs, vals_t, vals_f]),
        )
        files.append(scan_name)

    lines = [
        f"positivity: level {float(level)!r}, lift scale {lifted.lift_scale:.6e}, "
        f"certified floor {lifted.floor_estimate:.3e} "
        f"out to |x| <= {lifted.certified_half_range}",
        f"positivity: tiling member verdict {tiling_report.verdict}, "
        f"min on scan {scan_t.min_value:.6e} at x = {scan_t.argmin}",
        f"positivity: failing member verdict {failing_report.verdict}, "
        f"min on scan {scan_f.min_value:.6e} at x = {scan_f.argmin}, "
        f"deviation {failing_report.best_level_deviation:.3e}",
    ]
    if failing:
        lines.append(f"positivity: FAILED checks: {', '.join(failing)}")
        inconclusive = (
            tiling_report.verdict == "inconclusive"
            or failing_report.verdict == "inconclusive"
        )
        hard_fail = {"tilingMemberPositive", "failingMemberPositive", "certifiedFloorPositive"}
        code = (
            EXIT_NUMERIC
            if (hard_fail & set(failing)) or not inconclusive
            else EXIT_INCONCLUSIVE
        )
        return code, files, lines
    lines.append("positivity: both members positive, verdicts separated")
    return EXIT_OK, files, lines


def cmd_probe(config: ExperimentConfig, out_dir: Path, args) -> Tuple[int, List[str], List[str]]:
    build, files = _window_build(config, out_dir)
    if getattr(args, "lattice", None):
        build = _swap_lattice(build, args.lattice)

    b = config.geometry.b
    tests = make_test_family(
        count=config.probes.test_count,
        seed=config.probes.seed,
        window=(-b, b),
    )
    tol_poisson = config.probes.tol("poisson")
    tol_window = config.probes.tol("window")
    tol_conv = config.probes.tol("convolution")

    poisson = [poisson_check(t, tol=tol_poisson) for t in tests]
    window_checks = verify_window_spectrum(build, tests, tol=tol_window)
    conv = convolution_transform_check(
        build, config.density("unit-mass", grid=_density_grid(config)), tol=tol_conv
    )
    lemmas = lemma_bound_suite(
        SmoothWindow.frequency_cutoff(config.geometry), config.solver
    )
    comb_ok = (
        np.isfinite(lemmas.max_term_constant)
        and np.isfinite(lemmas.max_difference_constant)
        and lemmas.comb_deviation <= lemmas.comb_slack + 1e-12
    )

    results = poisson + window_checks
    failed = [r for r in results if not r.passed]
    hard = [r for r in failed if r.tail_bound <= r.tolerance]
    if not conv.passed:
        if conv.budget <= conv.tolerance:
            hard.append(conv)
        failed.append(conv)
    if not comb_ok:
        hard.append(lemmas)
        failed.append(lemmas)

    payload = {
        "poisson": [r.to_json_dict() for r in poisson],
        "window": [r.to_json_dict() for r in window_checks],
        "convolution": conv.to_json_dict(),
        "lemmas": lemmas.to_json_dict(),
        "combReferenceMatched": bool(comb_ok),
        "failedCount": len(failed),
        "passed": not failed,
    }
    report_name = "probe_report.json"
    write_json_artifact(out_dir / report_name, payload)
    files = files + [report_name]

    worst_window = max(window_checks, key=lambda r: r.deviation)
    lines = [
        f"probe: {len(poisson)} transform pairing checks, "
        f"worst deviation {max(r.deviation for r in poisson):.3e} (tol {tol_poisson:.1e})",
        f"probe: {len(window_checks)} window-spectrum checks, "
        f"worst deviation {worst_window.deviation:.3e} (tol {tol_window:.1e})",
        f"probe: smoothing identity deviation {conv.deviation:.3e} "
        f"(budget {conv.budget:.3e}, passed {conv.passed})",
        f"probe: kernel constants max {lemmas.max_term_constant:.3f} / "
        f"{lemmas.max_difference_constant:.3f}, comb deviation {lemmas.comb_deviation:.3e}",
    ]
    if failed:
        lines.append(f"probe: {len(failed)} checks FAILED")
        return (EXIT_NUMERIC if hard else EXIT_INCONCLUSIVE), files, lines
    lines.append("probe: all checks passed")
    return EXIT_OK, files, lines


# ---------------------------------------------------------------------------
# report


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def _report_lines(manifest: Optional[RunManifest], out_dir: Path, warnings: List[str]) -> List[str]:
    lines = ["run summary", "==========="]
    if manifest is None:
        warnings.append("no manifest found; nothing recorded yet")
        lines.append("no recorded stages")
        return lines
    lines.append(f"configuration hash: {manifest.config_hash}")
    lines.append(f"template: {manifest.template}")
    for key in sorted(manifest.versions):
        lines.append(f"version {key}: {manifest.versions[key]}")
    lines.append("")

    for stage in _STAGE_ORDER:
        if stage == "report":
            continue
        info = manifest.stages.get(stage)
        if info is None:
            lines.append(f"stage {stage}: absent")
            warnings.append(f"stage {stage}: no artifacts recorded")
            continue
        lines.append(f"stage {stage}: {info.get('status', 'unknown')}")
        for name in info.get("files", []):
            lines.append(f"  file {name}")

    def read_json(name: str) -> Optional[dict]:
        path = out_dir / name
        if not path.exists():
            return None
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)

    diag = read_json("lattice_diagnostics.json")
    spectrum = read_json("lattice_spectrum.json")
    if diag is not None and spectrum is not None:
        lines += [
            "",
            "window lattice",
            f"  prescription scale: {_fmt(spectrum.get('scale'))}",
            f"  iterations: {diag['iterations']}",
            f"  final residual: {_fmt(diag['finalResidual'])}",
            f"  offset sup: {_fmt(diag['alphaSup'])}",
            f"  transform residual: {_fmt(diag['transformResidual'])}",
            f"  chain residual: {_fmt(spectrum.get('chainResidual'))}",
        ]

    for name in sorted(p.name for p in out_dir.glob("tiling_*.json")):
        data = read_json(name)
        if data is None:
            continue
        lines += [
            "",
            f"tiling verdict [{data.get('densityName', name)}]",
            f"  verdict: {data.get('verdict')}",
            f"  level: {_fmt(data.get('level'))}",
            f"  sup deviation: {_fmt(data.get('supDeviation'))}",
            f"  route gap: {_fmt(data.get('routeGap'))}",
            f"  tail budget: {_fmt(data.get('tailBudget'))}",
        ]

    addendum = read_json("addendum_report.json")
    if addendum is not None:
        lines += [
            "",
            "level-zero addendum",
            f"  passed: {addendum.get('passed')}",
            f"  annulus verdict: {addendum.get('annulusTiling', {}).get('verdict')}",
            f"  annulus level: {_fmt(addendum.get('annulusTiling', {}).get('level'))}",
            f"  unit-mass verdict: {addendum.get('unitMassTiling', {}).get('verdict')}",
            f"  probe residual: {_fmt(addendum.get('spectrumProbe', {}).get('residual'))}",
        ]

    positivity = read_json("positivity_report.json")
    if positivity is not None:
        lines += [
            "",
            "positive verdict pair",
            f"  passed: {positivity.get('passed')}",
            f"  level: {_fmt(positivity.get('level'))}",
            f"  tiling member verdict: {positivity.get('tilingVerdict', {}).get('verdict')}",
            f"  failing member verdict: {positivity.get('failingVerdict', {}).get('verdict')}",
            f"  tiling member scan min: {_fmt(positivity.get('scanTiling', {}).get('minValue'))}",
            f"  failing member scan min: {_fmt(positivity.get('scanFailing', {}).get('minValue'))}",
        ]

    probe = read_json("probe_report.json")
    if probe is not None:
        lines += [
            "",
            "certificate suite",
            f"  passed: {probe.get('passed')}",
            f"  failed checks: {probe.get('failedCount')}",
            f"  comb reference matched: {probe.get('combReferenceMatched')}",
        ]
    return lines


def cmd_report(config: ExperimentConfig, out_dir: Path, args) -> Tuple[int, List[str], List[str]]:
    manifest = RunManifest.read(out_dir)
    warnings: List[str] = []
    lines = _report_lines(manifest, out_dir, warnings)
    files = ["report.txt"]
    report_path = out_dir / "report.txt"
    report_path.parent.mkdir(parents=True, exist_ok=True)
    with open(report_path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")

    lattice_path = out_dir / "lattice.csv"
    if lattice_path.exists():
        lattice = PerturbedLattice.from_csv(lattice_path)
        seq = lattice.offsets
        write_columns(
            out_dir / "report_offsets.txt",
            [seq.indices, seq.offsets],
            header="n offset",
        )
        files.append("report_offsets.txt")

    scan_path = out_dir / "positivity_scan.csv"
    if scan_path.exists():
        data = np.genfromtxt(scan_path, delimiter=",", skip_header=1)
        if data.ndim == 2 and data.shape[1] >= 3:
            write_columns(
                out_dir / "report_scan_tiling.txt",
                [data[:, 0], data[:, 1]],
                header="x value",
            )
            write_columns(
                out_dir / "report_scan_failing.txt",
                [data[:, 0], data[:, 2]],
                header="x value",
            )
            files += ["report_scan_tiling.txt", "report_scan_failing.txt"]

    for warning in warnings:
        print(f"warning: {warning}", file=sys.stderr)
    return EXIT_OK, files, lines


# ---------------------------------------------------------------------------
# driver


_WORKERS: Dict[str, Callable] = {
    "solve": cmd_solve,
    "tile": cmd_tile,
    "addendum": cmd_addendum,
    "positivity": cmd_positivity,
    "probe": cmd_probe,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quasilattice",
        description="perturbed integer lattices with prescribed window spectra",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", metavar="PATH", help="JSON configuration file")
        p.add_argument("--out", metavar="DIR", help="artifact directory")
        p.add_argument("--seed", metavar="U64", type=int, help="probe seed override")
        p.add_argument("--tol", metavar="REAL", type=float, help="tolerance override")

    p = sub.add_parser("solve", help="solve for the window lattice")
    add_common(p)

    p = sub.add_parser("tile", help="two-route translate-sum verdict for a density")
    add_common(p)
    p.add_argument("--lattice", metavar="FILE", help="lattice CSV to evaluate against")
    p.add_argument("--density", metavar="NAME", help="configured density name")

    p = sub.add_parser("addendum", help="level-zero lattice and its three checks")
    add_common(p)

    p = sub.add_parser("positivity", help="everywhere-positive verdict pair")
    add_common(p)
    p.add_argument("--level", metavar="REAL", type=float, help="tiling level (> 0)")

    p = sub.add_parser("probe", help="certificate suite for a lattice file")
    add_common(p)
    p.add_argument("--lattice", metavar="FILE", help="lattice CSV to probe")

    p = sub.add_parser("report", help="consolidate artifacts into a summary")
    add_common(p)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        config = _load_config(args)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out_dir = Path(args.out) if args.out else Path(config.outputs.directory)
    worker = _WORKERS[args.command]

    manifest = RunManifest.load_or_fresh(out_dir, config)
    start = time.perf_counter()
    try:
        code, files, lines = worker(config, out_dir, args)
    except (ConfigurationError, ContractViolation) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        manifest.record_stage(args.command, "error", time.perf_counter() - start, [])
        manifest.save(out_dir)
        return EXIT_CONFIG
    except (ConvergenceError, CalibrationError, ConstructionError) as exc:
        print(f"numeric check failed: {exc}", file=sys.stderr)
        manifest.record_stage(args.command, "failed", time.perf_counter() - start, [])
        manifest.save(out_dir)
        return EXIT_NUMERIC

    status = {EXIT_OK: "ok", EXIT_NUMERIC: "failed", EXIT_INCONCLUSIVE: "inconclusive"}[code]
    manifest.record_stage(args.command, status, time.perf_counter() - start, files)
    manifest.save(out_dir)
    for line in lines:
        print(line)
    return code


if __name__ == "__main__":
    sys.exit(main())
