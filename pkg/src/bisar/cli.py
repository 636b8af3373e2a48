"""Command-line front end.

Subcommands: simulate, image, psf, resolution-sweep, compare-baselines,
validate-config. Exit codes: 0 success, 2 validation error, 3 numerical
failure, 4 I/O error.

Configs are JSON with explicit units in key names (f0_hz, delta_sa_deg,
half_extent_m); every run writes a manifest listing stage timings and the
sha256 of each output file.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import coherent_sum_baseline, fbp_reconstruct, \
    peak_to_background
from .echo import (EchoCube, NoiseSpec, SymbolScheme, synthesize_bandlimited,
                   synthesize_exact, synthesize_farfield)
from .errors import NumericalError, ValidationError
from .estimators import estimate_dft, estimate_iaa
from .geometry import RadarConfig, RoiGrid, SectorPlan
from .io import (ManifestWriter, config_hash, load_cube, save_admap,
                 save_cube, save_image_csv, save_image_pgm)
from .pipeline import (EnergyImage, associate, image_wideband, range_compress,
                       reshape_sectors)
from .presets import build_preset_scene, rotating_platform_config
from .resolution import (MINUS_3DB, benchmark_resolution, measure_resolution,
                         numerical_psf, save_sweep_csv)
from .scene import Scene, load_scene

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

_SYNTHESIZERS = {
    "exact": synthesize_exact,
    "bandlimited": synthesize_bandlimited,
    "farfield": synthesize_farfield,
}


@dataclass
class ExperimentConfig:
    """Validated run configuration plus the raw document it came from."""

    radar: RadarConfig
    plan: SectorPlan
    grid: RoiGrid
    scene: Scene
    noise: NoiseSpec | None
    estimator: str
    fidelity: str
    symbol_scheme: SymbolScheme
    symbol_seed: int
    iaa_iters: int
    iaa_tol: float
    wideband: bool
    output_dir: Path
    seed: int
    threads: int
    raw: dict

    def digest(self) -> str:
        return hashlib.sha256(
            json.dumps(self.raw, sort_keys=True).encode()).hexdigest()


def _require(doc: dict, key: str, where: str):
    if key not in doc:
        raise ValidationError(f"missing key {key!r} in {where}")
    return doc[key]


def load_experiment_config(path, base_dir=None) -> ExperimentConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed config {path}: {exc}") from exc
    base_dir = Path(base_dir) if base_dir else path.parent

    r = _require(doc, "radar", "config")
    if "preset" in r:
        if r["preset"] != "rotating-platform":
            raise ValidationError(f"unknown radar preset {r['preset']!r}")
        radar = rotating_platform_config(
            n_subcarriers=int(r.get("n_subcarriers", 1024)),
            delta_f=float(r.get("delta_f_hz", 97.6e3)),
            radius=float(r.get("radius_m", 1.2)),
            height=float(r.get("height_m", 0.0)))
    else:
        kwargs = dict(
            f0=float(_require(r, "f0_hz", "radar")),
            delta_f=float(_require(r, "delta_f_hz", "radar")),
            n_subcarriers=int(_require(r, "n_subcarriers", "radar")),
            t0=float(_require(r, "t0_s", "radar")),
            tc=float(r.get("tc_s", 0.0)),
            radius=float(_require(r, "radius_m", "radar")),
            height=float(r.get("height_m", 0.0)),
            omega=float(_require(r, "omega_rad_s", "radar")),
            path_loss=float(r.get("path_loss", 1.0)))
        if "n_symbols" in r:
            radar = RadarConfig(n_symbols=int(r["n_symbols"]), **kwargs)
        else:
            radar = RadarConfig.full_revolution(**kwargs)

    p = _require(doc, "plan", "config")
    plan = SectorPlan.from_config(
        radar,
        delta_sa=math.radians(float(_require(p, "delta_sa_deg", "plan"))),
        k_sectors=int(_require(p, "k_sectors", "plan")),
        doppler_bins=int(_require(p, "doppler_bins", "plan")))

    g = _require(doc, "grid", "config")
    grid = RoiGrid.for_config(
        radar,
        half_extent=float(_require(g, "half_extent_m", "grid")),
        n_cells=int(_require(g, "n_cells", "grid")),
        roi_radius=float(g.get("roi_radius_m", g["half_extent_m"])),
        roi_height=float(g.get("roi_height_m", 1.0)))

    s = _require(doc, "scene", "config")
    if "file" in s:
        scene = load_scene(base_dir / s["file"])
    elif "preset" in s:
        kwargs = {k: v for k, v in s.items() if k != "preset"}
        scene = build_preset_scene(s["preset"], **kwargs)
    else:
        raise ValidationError("scene must give either 'file' or 'preset'")
    scene.check_in_cylinder(grid.roi_radius, grid.roi_height)

    n = doc.get("noise")
    noise = None if n is None else NoiseSpec(
        snr_db=float(_require(n, "snr_db", "noise")),
        seed=int(n.get("seed", 0)))

    estimator = doc.get("estimator", "iaa")
    if estimator not in ("dft", "iaa"):
        raise ValidationError(f"unknown estimator {estimator!r}")
    fidelity = doc.get("fidelity", "farfield")
    if fidelity not in _SYNTHESIZERS:
        raise ValidationError(f"unknown fidelity {fidelity!r}")
    symbols = doc.get("symbols", {})
    scheme = SymbolScheme(symbols.get("scheme", "unit"))
    iaa = doc.get("iaa", {})

    return ExperimentConfig(
        radar=radar, plan=plan, grid=grid, scene=scene, noise=noise,
        estimator=estimator, fidelity=fidelity, symbol_scheme=scheme,
        symbol_seed=int(symbols.get("seed", 0)),
        iaa_iters=int(iaa.get("iters", 15)),
        iaa_tol=float(iaa.get("tol", 1e-3)),
        wideband=bool(doc.get("wideband", False)),
        output_dir=Path(doc.get("output_dir", ".")),
        seed=int(doc.get("seed", 0)),
        threads=int(doc.get("threads", 1)),
        raw=doc)


class _Stopwatch:
    def __init__(self, manifest: ManifestWriter):
        self.manifest = manifest

    def run(self, name, fn):
        start = time.perf_counter()
        result = fn()
        self.manifest.add_stage(name, time.perf_counter() - start)
        return result


def _prepare(args) -> tuple[ExperimentConfig, ManifestWriter, _Stopwatch]:
    exp = load_experiment_config(args.config)
    if getattr(args, "output_dir", None):
        exp.output_dir = Path(args.output_dir)
    if getattr(args, "threads", None):
        exp.threads = args.threads
    exp.output_dir.mkdir(parents=True, exist_ok=True)
    manifest = ManifestWriter(exp.digest(), __version__)
    return exp, manifest, _Stopwatch(manifest)


def _synthesize(exp: ExperimentConfig) -> EchoCube:
    synth = _SYNTHESIZERS[exp.fidelity]
    kwargs = dict(noise=exp.noise, scheme=exp.symbol_scheme,
                  symbol_seed=exp.symbol_seed, roi=exp.grid)
    if exp.fidelity == "farfield" and exp.wideband:
        kwargs["allow_wide"] = True
    return synth(exp.scene, exp.radar, **kwargs)


def _write_image(image: EnergyImage, stem: str, exp: ExperimentConfig,
                 manifest: ManifestWriter) -> None:
    csv_path = exp.output_dir / f"{stem}.csv"
    pgm_path = exp.output_dir / f"{stem}.pgm"
    save_image_csv(image, csv_path)
    save_image_pgm(image, pgm_path)
    manifest.add_output(csv_path)
    manifest.add_output(pgm_path)
    manifest.add_output(str(pgm_path) + ".json")


def cmd_simulate(args) -> int:
    exp, manifest, watch = _prepare(args)
    cube = watch.run("synthesize", lambda: _synthesize(exp))
    cube_path = exp.output_dir / "cube.bin"
    watch.run("write", lambda: save_cube(cube, cube_path))
    manifest.add_output(cube_path)
    manifest.write(exp.output_dir / "simulate.manifest.json")
    print(f"wrote {cube_path}")
    return EXIT_OK


def _image_from_cube(exp: ExperimentConfig, cube: EchoCube, watch,
                     dump_admap: bool, manifest: ManifestWriter
                     ) -> EnergyImage:
    meta = {"config_sha256": exp.digest(), "scene": exp.scene.label}
    if exp.wideband:
        return watch.run("image", lambda: image_wideband(
            cube, exp.plan, exp.grid, estimator=exp.estimator,
            iaa_iters=exp.iaa_iters, iaa_tol=exp.iaa_tol,
            workers=exp.threads, metadata=meta))
    sc = watch.run("reshape", lambda: reshape_sectors(cube, exp.plan))
    rc = watch.run("compress", lambda: range_compress(sc))
    if exp.estimator == "dft":
        map_ = watch.run("estimate", lambda: estimate_dft(rc))
    else:
        map_ = watch.run("estimate", lambda: estimate_iaa(
            rc, iters=exp.iaa_iters, tol=exp.iaa_tol, workers=exp.threads))
    if dump_admap:
        admap_path = exp.output_dir / "admap.bin"
        save_admap(map_, admap_path)
        manifest.add_output(admap_path)
    return watch.run("associate",
                     lambda: associate(map_, exp.radar, exp.grid, meta))


def cmd_image(args) -> int:
    exp, manifest, watch = _prepare(args)
    if args.estimator:
        exp.estimator = args.estimator
    if args.wideband:
        exp.wideband = True
    cube = watch.run("load", lambda: load_cube(args.cube, exp.radar))
    image = _image_from_cube(exp, cube, watch, args.dump_admap, manifest)
    _write_image(image, f"image_{exp.estimator}", exp, manifest)
    if args.detection:
        mask = image.values >= image.values.max() * MINUS_3DB
        detection = EnergyImage(values=mask.astype(float), grid=exp.grid,
                                metadata={"detection_threshold_db": -3.0})
        _write_image(detection, "detection", exp, manifest)
    manifest.write(exp.output_dir / "image.manifest.json")
    print(f"wrote {exp.output_dir / ('image_' + exp.estimator + '.csv')}")
    return EXIT_OK


def cmd_psf(args) -> int:
    exp, manifest, watch = _prepare(args)
    probe = (args.probe_x, args.probe_y)
    estimator = args.estimator or exp.estimator
    profile = watch.run("psf", lambda: numerical_psf(
        exp.radar, exp.plan, probe, estimator=estimator,
        iaa_iters=exp.iaa_iters, iaa_tol=exp.iaa_tol))
    report = {
        "probe_m": list(profile.probe),
        "estimator": estimator,
        "delta_measured_m": profile.resolution(),
        "delta_benchmark_m": benchmark_resolution(exp.radar, exp.plan),
        "zeta_spread": profile.zeta_spread(),
        "beta": profile.beta,
    }
    report_path = exp.output_dir / "psf_report.json"
    report_path.write_text(json.dumps(report, indent=2) + "\n")
    manifest.add_output(report_path)
    contour_path = exp.output_dir / "psf_contour.csv"
    lines = ["alpha_rad,zeta_m"] + [
        f"{a!r},{z!r}" for a, z in zip(profile.alphas, profile.zeta)]
    contour_path.write_text("\n".join(lines) + "\n")
    manifest.add_output(contour_path)
    manifest.write(exp.output_dir / "psf.manifest.json")
    print(f"measured resolution {report['delta_measured_m']:.4f} m "
          f"(benchmark {report['delta_benchmark_m']:.4f} m)")
    return EXIT_OK


def cmd_resolution_sweep(args) -> int:
    exp, manifest, watch = _prepare(args)
    sweep = exp.raw.get("sweep", {})
    bench = benchmark_resolution(exp.radar, exp.plan)
    if "spacings_m" in sweep:
        spacings = [float(v) for v in sweep["spacings_m"]]
    else:
        lo = float(sweep.get("start_rel", 0.6))
        hi = float(sweep.get("stop_rel", 1.2))
        steps = int(sweep.get("steps", 7))
        spacings = list(np.linspace(lo * bench, hi * bench, steps))
    trials = int(sweep.get("trials", 20))
    snr_db = sweep.get("snr_db", 20.0)
    snr_db = None if snr_db is None else float(snr_db)
    estimators = tuple(sweep.get("estimators", ["dft", "iaa"]))

    report, curves = watch.run("sweep", lambda: measure_resolution(
        exp.radar, exp.plan, spacings, trials, snr_db,
        seed=exp.seed, estimators=estimators, iaa_iters=exp.iaa_iters,
        iaa_tol=exp.iaa_tol, workers=exp.threads))
    curve_path = exp.output_dir / "resolution_sweep.csv"
    save_sweep_csv(curves, curve_path)
    manifest.add_output(curve_path)
    report_path = exp.output_dir / "resolution_report.json"
    report.save(report_path)
    manifest.add_output(report_path)
    manifest.write(exp.output_dir / "resolution-sweep.manifest.json")
    print(f"measured {report.delta_measured:.4f} m vs benchmark "
          f"{report.delta_benchmark:.4f} m")
    return EXIT_OK


def cmd_compare_baselines(args) -> int:
    exp, manifest, watch = _prepare(args)
    cube = watch.run("load", lambda: load_cube(args.cube, exp.radar))
    sc = watch.run("reshape", lambda: reshape_sectors(cube, exp.plan))
    rc = watch.run("compress", lambda: range_compress(sc))
    map_ = watch.run("estimate", lambda: estimate_iaa(
        rc, iters=exp.iaa_iters, tol=exp.iaa_tol, workers=exp.threads))
    meta = {"config_sha256": exp.digest()}
    img_iaa = associate(map_, exp.radar, exp.grid, meta)
    img_fbp = watch.run("fbp", lambda: fbp_reconstruct(
        rc, exp.radar, exp.grid, meta))
    img_coh = watch.run("coherent", lambda: coherent_sum_baseline(
        map_, exp.radar, exp.grid, meta))
    for stem, image in (("image_iaa", img_iaa), ("image_fbp", img_fbp),
                        ("image_coherent", img_coh)):
        _write_image(image, stem, exp, manifest)
    ratios = {stem: peak_to_background(image)
              for stem, image in (("iaa", img_iaa), ("fbp", img_fbp),
                                  ("coherent", img_coh))}
    ratio_path = exp.output_dir / "baseline_ratios.json"
    ratio_path.write_text(json.dumps(ratios, indent=2) + "\n")
    manifest.add_output(ratio_path)
    manifest.write(exp.output_dir / "compare-baselines.manifest.json")
    print(json.dumps(ratios))
    return EXIT_OK


def cmd_validate_config(args) -> int:
    exp = load_experiment_config(args.config)
    print(f"config ok: sha256 {exp.digest()}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bisar",
        description="Doppler-only SAR/ISAR imaging simulator and "
                    "reconstruction toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("config", help="experiment config (JSON)")
        p.add_argument("--output-dir", help="override the config output_dir")
        p.add_argument("--threads", type=int,
                       help="cap worker count (1 = sequential)")

    p = sub.add_parser("simulate", help="synthesize an echo cube")
    add_common(p)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("image", help="reconstruct an image from a cube")
    add_common(p)
    p.add_argument("cube", help="cube file from 'simulate'")
    p.add_argument("--estimator", choices=["dft", "iaa"])
    p.add_argument("--wideband", action="store_true",
                   help="per-subcarrier imaging for large scenes")
    p.add_argument("--dump-admap", action="store_true",
                   help="also write the angle-Doppler map")
    p.add_argument("--detection", action="store_true",
                   help="write a -3 dB thresholded binary map")
    p.set_defaults(fn=cmd_image)

    p = sub.add_parser("psf", help="measure the point spread function")
    add_common(p)
    p.add_argument("--probe-x", type=float, default=0.0)
    p.add_argument("--probe-y", type=float, default=0.0)
    p.add_argument("--estimator", choices=["dft", "iaa"])
    p.set_defaults(fn=cmd_psf)

    p = sub.add_parser("resolution-sweep",
                       help="two-point resolution probability sweep")
    add_common(p)
    p.set_defaults(fn=cmd_resolution_sweep)

    p = sub.add_parser("compare-baselines",
                       help="IAA association vs FBP and coherent summation")
    add_common(p)
    p.add_argument("cube", help="cube file from 'simulate'")
    p.set_defaults(fn=cmd_compare_baselines)

    p = sub.add_parser("validate-config", help="check a config and exit")
    p.add_argument("config")
    p.set_defaults(fn=cmd_validate_config)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
