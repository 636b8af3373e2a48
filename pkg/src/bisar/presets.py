"""Named experiment presets: the rotating-platform radio configuration and
the measurement scenes used by the worked examples and the acceptance
suite."""

from __future__ import annotations

import math

import numpy as np

from .errors import ValidationError
from .geometry import RadarConfig
from .scene import Isotropic, Lobed, Scatterer, Scene, SectoredRandom

# Four cylindrical reflectors on the turntable, positions in meters.
FOUR_CYLINDER_POSITIONS = (
    (0.075, 0.145),
    (0.145, 0.095),
    (-0.12, -0.11),
    (-0.055, -0.15),
)

# Cardboard box dimensions along x, y, z in meters.
BOX_DIMENSIONS = (0.35, 0.41, 0.33)


def rotating_platform_config(n_subcarriers: int = 1024,
                             delta_f: float = 97.6e3,
                             radius: float = 1.2, height: float = 0.0
                             ) -> RadarConfig:
    """29 GHz turntable acquisition: 20 s spin, 5 ms symbol interval,
    4000 symbols per revolution."""
    return RadarConfig.full_revolution(
        f0=29e9, delta_f=delta_f, n_subcarriers=n_subcarriers, t0=5e-3,
        radius=radius, height=height, omega=2.0 * math.pi / 20.0)


def _scattering(kind: str, rng: np.random.Generator, n_sectors: int,
                amplitude: float, jitter: float):
    if kind == "isotropic":
        return Isotropic(amplitude=amplitude)
    if kind == "sectored":
        return SectoredRandom(amplitude_mean=amplitude,
                              amplitude_jitter=jitter,
                              n_sectors=n_sectors,
                              rng_seed=int(rng.integers(0, 2 ** 63 - 1)))
    if kind == "lobed":
        return Lobed(amplitude=amplitude,
                     peak_angle=float(rng.uniform(0.0, 2.0 * math.pi)),
                     concentration=2.0)
    raise ValidationError(f"unknown scattering kind {kind!r}")


def four_cylinders_scene(scattering: str = "sectored", seed: int = 0,
                         n_sectors: int = 400, amplitude: float = 1.0,
                         jitter: float = 0.2) -> Scene:
    rng = np.random.default_rng(seed)
    scatterers = tuple(
        Scatterer((x, y, 0.0),
                  _scattering(scattering, rng, n_sectors, amplitude, jitter))
        for x, y in FOUR_CYLINDER_POSITIONS)
    return Scene(scatterers, label="four-cylinders")


def box_scene(scattering: str = "sectored", seed: int = 0,
              n_sectors: int = 400, amplitude: float = 1.0,
              jitter: float = 0.2, spacing: float = 0.04) -> Scene:
    """Point-cloud shell of the box target, one scatterer per surface patch."""
    lx, ly, lz = BOX_DIMENSIONS
    hx, hy, hz = lx / 2.0, ly / 2.0, lz / 2.0
    rng = np.random.default_rng(seed)

    def axis(h):
        n = max(2, int(round(2.0 * h / spacing)) + 1)
        return np.linspace(-h, h, n)

    points = set()
    xs, ys, zs = axis(hx), axis(hy), axis(hz)
    for x in xs:
        for y in ys:
            points.add((x, y, -hz))
            points.add((x, y, hz))
    for x in xs:
        for z in zs:
            points.add((x, -hy, z))
            points.add((x, hy, z))
    for y in ys:
        for z in zs:
            points.add((-hx, y, z))
            points.add((hx, y, z))

    scatterers = tuple(
        Scatterer(p, _scattering(scattering, rng, n_sectors, amplitude,
                                 jitter))
        for p in sorted(points))
    return Scene(scatterers, label="box")


def point_pair_scene(spacing: float, angle: float = 0.0,
                     scattering: str = "isotropic", seed: int = 0,
                     n_sectors: int = 400, amplitude: float = 1.0,
                     jitter: float = 0.2) -> Scene:
    rng = np.random.default_rng(seed)
    h = spacing / 2.0
    ux, uy = math.cos(angle), math.sin(angle)
    scatterers = tuple(
        Scatterer((s * h * ux, s * h * uy, 0.0),
                  _scattering(scattering, rng, n_sectors, amplitude, jitter))
        for s in (-1, 1))
    return Scene(scatterers, label="point-pair")


def single_point_scene(x: float = 0.0, y: float = 0.0,
                       scattering: str = "isotropic", seed: int = 0,
                       n_sectors: int = 400, amplitude: float = 1.0,
                       jitter: float = 0.2) -> Scene:
    rng = np.random.default_rng(seed)
    return Scene((Scatterer((x, y, 0.0),
                            _scattering(scattering, rng, n_sectors,
                                        amplitude, jitter)),),
                 label="single-point")


SCENE_PRESETS = {
    "four-cylinders": four_cylinders_scene,
    "box": box_scene,
    "point-pair": point_pair_scene,
    "single": single_point_scene,
}


def build_preset_scene(name: str, **kwargs) -> Scene:
    try:
        factory = SCENE_PRESETS[name]
    except KeyError:
        raise ValidationError(
            f"unknown scene preset {name!r}; available: "
            f"{', '.join(sorted(SCENE_PRESETS))}") from None
    return factory(**kwargs)
