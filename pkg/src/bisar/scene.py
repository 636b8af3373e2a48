"""Point-scatterer scenes with angle-dependent complex scattering.

Targets are finite sets of point scatterers. Each scatterer carries a
scattering model giving its complex reflectivity as a function of the
observation azimuth; the three variants cover the isotropic ideal, a
piecewise-constant random model (independent amplitude/phase per angular
sector, the stress case for coherent processing), and a smooth directional
lobe. Random models draw all their values at construction time from a
seeded generator, so evaluation is pure and reproducible.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .geometry import RadarConfig

SCENE_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Isotropic:
    """Constant complex reflectivity at every azimuth."""

    amplitude: float
    phase: float = 0.0

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValidationError("amplitude must be >= 0")

    def evaluate(self, phi):
        value = self.amplitude * np.exp(1j * self.phase)
        return np.broadcast_to(value, np.shape(phi)).copy() \
            if np.ndim(phi) else value


@dataclass(frozen=True)
class SectoredRandom:
    """Piecewise-constant random reflectivity over angular sectors.

    The circle is split into ``n_sectors`` equal sectors centered on the
    angles 2*pi*s/n_sectors, so a correlation window of half-width up to
    pi/n_sectors about any sector center sees a single constant value. Per
    sector, the amplitude is amplitude_mean * (1 + amplitude_jitter * u)
    with u uniform on [-1, 1] (clipped at zero) and the phase is uniform on
    [0, 2*pi).
    """

    amplitude_mean: float
    amplitude_jitter: float
    n_sectors: int
    rng_seed: int
    _values: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.amplitude_mean < 0:
            raise ValidationError("amplitude_mean must be >= 0")
        if not 0 <= self.amplitude_jitter <= 1:
            raise ValidationError("amplitude_jitter must be in [0, 1]")
        if self.n_sectors < 1:
            raise ValidationError("n_sectors must be >= 1")
        rng = np.random.default_rng(self.rng_seed)
        amps = self.amplitude_mean * (
            1.0 + self.amplitude_jitter * rng.uniform(-1.0, 1.0,
                                                      self.n_sectors))
        phases = rng.uniform(0.0, 2.0 * math.pi, self.n_sectors)
        values = np.clip(amps, 0.0, None) * np.exp(1j * phases)
        values.setflags(write=False)
        object.__setattr__(self, "_values", values)

    def sector_index(self, phi):
        """Sector whose center is nearest to ``phi`` (wrapped)."""
        width = 2.0 * math.pi / self.n_sectors
        idx = np.rint(np.asarray(phi) / width).astype(np.int64)
        return np.mod(idx, self.n_sectors)

    def evaluate(self, phi):
        return self._values[self.sector_index(phi)]


@dataclass(frozen=True)
class Lobed:
    """Smooth directional reflectivity with a von-Mises-shaped gain.

    Gain is 1 at ``peak_angle`` and decays with angular distance at a rate
    set by ``concentration``; concentration 0 degenerates to isotropic.
    """

    amplitude: float
    peak_angle: float
    concentration: float
    phase: float = 0.0

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValidationError("amplitude must be >= 0")
        if self.concentration < 0:
            raise ValidationError("concentration must be >= 0")

    def evaluate(self, phi):
        gain = np.exp(self.concentration
                      * (np.cos(np.asarray(phi) - self.peak_angle) - 1.0))
        return self.amplitude * gain * np.exp(1j * self.phase)


ScatteringModel = Isotropic | SectoredRandom | Lobed


@dataclass(frozen=True)
class Scatterer:
    position: tuple[float, float, float]
    scattering: ScatteringModel

    def __post_init__(self):
        if len(self.position) != 3:
            raise ValidationError("position must be a 3-vector")
        object.__setattr__(self, "position",
                           tuple(float(v) for v in self.position))


@dataclass(frozen=True)
class Scene:
    scatterers: tuple[Scatterer, ...]
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "scatterers", tuple(self.scatterers))

    def __len__(self):
        return len(self.scatterers)

    def require_nonempty(self):
        if not self.scatterers:
            raise ValidationError("scene has no scatterers")

    def check_in_cylinder(self, roi_radius: float, roi_height: float):
        """Validate every scatterer lies inside the ROI cylinder."""
        for s in self.scatterers:
            x, y, z = s.position
            if math.hypot(x, y) > roi_radius + 1e-12 \
                    or abs(z) > roi_height / 2 + 1e-12:
                raise ValidationError(
                    f"scatterer at {s.position} outside ROI cylinder "
                    f"(radius {roi_radius}, height {roi_height})")

    def max_pairwise_distance(self) -> float:
        pos = np.array([s.position for s in self.scatterers])
        if len(pos) < 2:
            return 0.0
        diff = pos[:, None, :] - pos[None, :, :]
        return float(np.sqrt((diff ** 2).sum(-1)).max())


def eval_scattering(s: Scatterer, phi):
    """Complex reflectivity of ``s`` at azimuth ``phi`` (scalar or array)."""
    return s.scattering.evaluate(phi)


def project_to_2d(s: Scatterer, cfg: RadarConfig, phi):
    """Effective planar reflectivity used by the far-field forward model.

    Folds the z coordinate into a phase: the standoff phase
    exp(-j 4 pi/lambda * sqrt(R^2+H^2)) times exp(+j 4 pi/lambda * zH /
    sqrt(R^2+H^2)). With height 0 the z dependence vanishes entirely, which
    is why reconstructions are projections onto the plane.
    """
    z = s.position[2]
    k2 = 4.0 * math.pi / cfg.wavelength
    phase = -k2 * cfg.standoff + k2 * z * cfg.height / cfg.standoff
    return eval_scattering(s, phi) * np.exp(1j * phase)


# ---------------------------------------------------------------------------
# Scene file format: JSON with a schema_version field. Floats round-trip
# exactly through repr, so save -> load is lossless.

def _model_to_dict(model: ScatteringModel) -> dict:
    if isinstance(model, Isotropic):
        return {"kind": "isotropic", "amplitude": model.amplitude,
                "phase": model.phase}
    if isinstance(model, SectoredRandom):
        return {"kind": "sectored_random",
                "amplitude_mean": model.amplitude_mean,
                "amplitude_jitter": model.amplitude_jitter,
                "n_sectors": model.n_sectors, "rng_seed": model.rng_seed}
    if isinstance(model, Lobed):
        return {"kind": "lobed", "amplitude": model.amplitude,
                "peak_angle": model.peak_angle,
                "concentration": model.concentration, "phase": model.phase}
    raise ValidationError(f"unknown scattering model {type(model).__name__}")


def _model_from_dict(d: dict) -> ScatteringModel:
    kind = d.get("kind")
    params = {k: v for k, v in d.items() if k != "kind"}
    try:
        if kind == "isotropic":
            return Isotropic(**params)
        if kind == "sectored_random":
            return SectoredRandom(**params)
        if kind == "lobed":
            return Lobed(**params)
    except TypeError as exc:
        raise ValidationError(f"bad scattering parameters: {exc}") from exc
    raise ValidationError(f"unknown scattering kind {kind!r}")


def scene_to_dict(scene: Scene) -> dict:
    return {
        "schema_version": SCENE_SCHEMA_VERSION,
        "label": scene.label,
        "scatterers": [
            {"position": list(s.position),
             "scattering": _model_to_dict(s.scattering)}
            for s in scene.scatterers
        ],
    }


def scene_from_dict(data: dict) -> Scene:
    version = data.get("schema_version")
    if version != SCENE_SCHEMA_VERSION:
        raise ValidationError(
            f"unsupported scene schema_version {version!r}")
    scatterers = [
        Scatterer(position=tuple(entry["position"]),
                  scattering=_model_from_dict(entry["scattering"]))
        for entry in data.get("scatterers", [])
    ]
    return Scene(scatterers=tuple(scatterers), label=data.get("label", ""))


def save_scene(scene: Scene, path) -> None:
    Path(path).write_text(json.dumps(scene_to_dict(scene), indent=2) + "\n")


def load_scene(path) -> Scene:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed scene file {path}: {exc}") from exc
    return scene_from_dict(data)
