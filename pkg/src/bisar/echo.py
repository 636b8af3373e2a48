"""Synthesis of the post-FFT received sample cube s[n][l].

The cube is generated directly in the frequency domain: each symbol column
is the superposition of per-scatterer contributions
c[n,l] * xi * f(r; phi_l) * exp(-j 4 pi d / lambda) * exp(-j 2 pi n df 2 d / c)
under one of three distance models:

  exact        d = || R(phi_l) p - r ||            everywhere
  bandlimited  exact d in the carrier phase, common standoff in the
               subcarrier phase
  farfield     first-order plane-wave d in the carrier phase, common
               standoff in the subcarrier phase

Positions are sampled once per symbol (stop-and-go).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .errors import ValidationError
from .geometry import C_LIGHT, RadarConfig, RoiGrid
from .scene import Scene, eval_scattering, project_to_2d


class Fidelity(str, Enum):
    EXACT = "exact"
    BAND_LIMITED = "bandlimited"
    FAR_FIELD = "farfield"


class SymbolScheme(str, Enum):
    UNIT_CONSTANT = "unit"
    QPSK = "qpsk"


@dataclass(frozen=True)
class NoiseSpec:
    """Per-sample AWGN level relative to the mean signal power."""

    snr_db: float
    seed: int = 0

    def __post_init__(self):
        if not np.isfinite(self.snr_db):
            raise ValidationError("snr_db must be finite")


@dataclass(frozen=True)
class EchoCube:
    """Complex post-FFT samples [n_subcarriers x n_symbols] plus the data
    symbols that modulated them."""

    samples: np.ndarray
    data_symbols: np.ndarray
    cfg: RadarConfig
    fidelity: Fidelity
    symbol_scheme: SymbolScheme = SymbolScheme.UNIT_CONSTANT
    symbol_seed: int = 0

    def __post_init__(self):
        expected = (self.cfg.n_subcarriers, self.cfg.n_symbols)
        if self.samples.shape != expected:
            raise ValidationError(
                f"samples shape {self.samples.shape} != {expected}")
        if self.data_symbols.shape != expected:
            raise ValidationError(
                f"data_symbols shape {self.data_symbols.shape} != {expected}")
        if np.any(self.data_symbols == 0):
            raise ValidationError("data symbols must all be nonzero")


def gen_data_symbols(cfg: RadarConfig, scheme: SymbolScheme | str,
                     seed: int = 0) -> np.ndarray:
    """Unit-modulus data symbol matrix [N x L], reproducible from the seed."""
    scheme = SymbolScheme(scheme)
    shape = (cfg.n_subcarriers, cfg.n_symbols)
    if scheme is SymbolScheme.UNIT_CONSTANT:
        return np.ones(shape, dtype=np.complex128)
    rng = np.random.default_rng(seed)
    quadrant = rng.integers(0, 4, size=shape)
    constellation = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]) / np.sqrt(2)
    return constellation[quadrant]


def add_awgn(cube: EchoCube, noise: NoiseSpec | None) -> EchoCube:
    """Return ``cube`` with circular complex Gaussian noise added.

    The noise power is mean(|samples|^2) / 10^(snr_db/10) per sample. A
    ``None`` spec returns the cube unchanged.
    """
    if noise is None:
        return cube
    signal_power = float(np.mean(np.abs(cube.samples) ** 2))
    noise_power = signal_power * 10.0 ** (-noise.snr_db / 10.0)
    rng = np.random.default_rng(noise.seed)
    sigma = np.sqrt(noise_power / 2.0)
    z = rng.normal(0.0, sigma, cube.samples.shape) \
        + 1j * rng.normal(0.0, sigma, cube.samples.shape)
    return replace(cube, samples=cube.samples + z)


def _symbol_angles(cfg: RadarConfig) -> np.ndarray:
    return cfg.omega * cfg.t0 * np.arange(cfg.n_symbols)


def _synthesize(scene: Scene, cfg: RadarConfig, fidelity: Fidelity,
                symbols: np.ndarray) -> np.ndarray:
    """Noise-free sample cube for the requested distance model."""
    phis = _symbol_angles(cfg)
    n = np.arange(cfg.n_subcarriers)
    d_bar = cfg.standoff
    k_carrier = 4.0 * np.pi / cfg.wavelength
    acc = np.zeros((cfg.n_subcarriers, cfg.n_symbols), dtype=np.complex128)

    for s in scene.scatterers:
        x, y, z = s.position
        if fidelity is Fidelity.FAR_FIELD:
            # plane-wave carrier phase, built from the projected reflectivity
            refl = project_to_2d(s, cfg, phis)
            cross = (cfg.radius / d_bar) * (x * np.cos(phis)
                                            + y * np.sin(phis))
            col = refl * np.exp(1j * k_carrier * cross)
            sub = np.exp(-2j * np.pi * n * cfg.delta_f * 2.0 * d_bar
                         / C_LIGHT)
            acc += sub[:, None] * col[None, :]
            continue

        # exact per-symbol distance to the rotating BS
        bs_x = cfg.radius * np.cos(phis)
        bs_y = cfg.radius * np.sin(phis)
        dist = np.sqrt((bs_x - x) ** 2 + (bs_y - y) ** 2
                       + (cfg.height - z) ** 2)
        refl = eval_scattering(s, phis)
        col = refl * np.exp(-1j * k_carrier * dist)
        if fidelity is Fidelity.EXACT:
            # subcarrier phase keeps the exact distance; not separable in n
            acc += col[None, :] * np.exp(
                -2j * np.pi * np.outer(n, cfg.delta_f * 2.0 * dist / C_LIGHT))
        else:  # BAND_LIMITED: common standoff in the subcarrier phase
            sub = np.exp(-2j * np.pi * n * cfg.delta_f * 2.0 * d_bar
                         / C_LIGHT)
            acc += sub[:, None] * col[None, :]
    return symbols * cfg.path_loss * acc


def _make_cube(scene: Scene, cfg: RadarConfig, fidelity: Fidelity,
               noise: NoiseSpec | None, scheme: SymbolScheme | str,
               symbol_seed: int, roi: RoiGrid | None) -> EchoCube:
    scene.require_nonempty()
    if roi is not None:
        scene.check_in_cylinder(roi.roi_radius, roi.roi_height)
    scheme = SymbolScheme(scheme)
    symbols = gen_data_symbols(cfg, scheme, symbol_seed)
    samples = _synthesize(scene, cfg, fidelity, symbols)
    cube = EchoCube(samples=samples, data_symbols=symbols, cfg=cfg,
                    fidelity=fidelity, symbol_scheme=scheme,
                    symbol_seed=symbol_seed)
    return add_awgn(cube, noise)


def synthesize_exact(scene: Scene, cfg: RadarConfig,
                     noise: NoiseSpec | None = None,
                     scheme: SymbolScheme | str = SymbolScheme.UNIT_CONSTANT,
                     symbol_seed: int = 0,
                     roi: RoiGrid | None = None) -> EchoCube:
    """Echo cube under the exact distance model (no approximations)."""
    return _make_cube(scene, cfg, Fidelity.EXACT, noise, scheme, symbol_seed,
                      roi)


def synthesize_bandlimited(scene: Scene, cfg: RadarConfig,
                           noise: NoiseSpec | None = None,
                           scheme: SymbolScheme | str =
                           SymbolScheme.UNIT_CONSTANT,
                           symbol_seed: int = 0,
                           roi: RoiGrid | None = None) -> EchoCube:
    """Echo cube with the common-range subcarrier phase but exact carrier
    phase; isolates the narrowband approximation from the far-field one."""
    return _make_cube(scene, cfg, Fidelity.BAND_LIMITED, noise, scheme,
                      symbol_seed, roi)


def synthesize_farfield(scene: Scene, cfg: RadarConfig,
                        noise: NoiseSpec | None = None,
                        scheme: SymbolScheme | str =
                        SymbolScheme.UNIT_CONSTANT,
                        symbol_seed: int = 0,
                        roi: RoiGrid | None = None,
                        allow_wide: bool = False) -> EchoCube:
    """Echo cube under the plane-wave + common-range model.

    Unless ``allow_wide`` is set (the per-subcarrier imaging path), the
    scene must fit in a single range cell: max pairwise scatterer distance
    < c / (2 B).
    """
    if not allow_wide:
        limit = C_LIGHT / (2.0 * cfg.bandwidth)
        extent = scene.max_pairwise_distance()
        if extent >= limit:
            raise ValidationError(
                f"scene extent {extent:.3f} m exceeds the range cell "
                f"{limit:.3f} m; use the exact model or the wideband path")
    return _make_cube(scene, cfg, Fidelity.FAR_FIELD, noise, scheme,
                      symbol_seed, roi)
