"""Acquisition geometry, azimuth scheduling, the Doppler law, and the
unambiguous-region bound.

Everything here is a pure function of immutable inputs. Angles are kept
unwrapped; wrapping happens only where a caller assigns symbols to azimuth
sectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

C_LIGHT = 299792458.0

# Cap recommended for the small-angle parameter (rad); anisotropic scattering
# decorrelates beyond roughly this span.
MAX_DELTA_SA = math.radians(3.0) + 1e-12


def round_half_away(x):
    """Round to nearest integer, halves away from zero (ndarray or scalar).

    This is the bracket-operator convention used throughout the sector and
    Doppler quantization; Python's builtin round() (banker's) must not leak
    into index math.
    """
    x = np.asarray(x)
    return np.trunc(x + np.copysign(0.5, x)).astype(np.int64)


@dataclass(frozen=True)
class RadarConfig:
    """All radio/geometry scalars defining one acquisition.

    ``tc`` (cyclic-prefix duration) is retained as metadata only; the symbol
    interval ``t0`` drives every Doppler phase term.
    """

    f0: float               # carrier frequency of the first subcarrier [Hz]
    delta_f: float           # subcarrier spacing [Hz]
    n_subcarriers: int
    n_symbols: int
    t0: float                # interval between symbols used for imaging [s]
    radius: float            # BS/target circle radius [m]
    height: float            # BS height above the ROI plane [m]
    omega: float             # angular velocity [rad/s]; sign = direction
    tc: float = 0.0          # cyclic prefix [s], unused by the Doppler math
    path_loss: float = 1.0   # two-way path loss scalar

    def __post_init__(self):
        if self.f0 <= 0:
            raise ValidationError("f0 must be positive")
        if self.delta_f <= 0:
            raise ValidationError("delta_f must be positive")
        if self.n_subcarriers < 1:
            raise ValidationError("n_subcarriers must be >= 1")
        if self.n_symbols < 1:
            raise ValidationError("n_symbols must be >= 1")
        if self.t0 <= 0:
            raise ValidationError("t0 must be positive")
        if self.radius <= 0:
            raise ValidationError("radius must be positive")
        if self.omega == 0:
            raise ValidationError("omega must be nonzero")
        if self.path_loss == 0:
            raise ValidationError("path_loss must be nonzero")

    @property
    def wavelength(self) -> float:
        return C_LIGHT / self.f0

    @property
    def bandwidth(self) -> float:
        return self.n_subcarriers * self.delta_f

    @property
    def standoff(self) -> float:
        """Distance from the BS circle to the ROI center, sqrt(R^2 + H^2)."""
        return math.hypot(self.radius, self.height)

    @property
    def elevation_factor(self) -> float:
        """sqrt(1 + H^2/R^2)."""
        return self.standoff / self.radius

    @classmethod
    def full_revolution(cls, f0, delta_f, n_subcarriers, t0, radius, height,
                        omega, tc=0.0, path_loss=1.0) -> "RadarConfig":
        """Construct with n_symbols covering exactly one 360-degree sweep."""
        n_symbols = full_revolution_symbols(omega, t0)
        return cls(f0=f0, delta_f=delta_f, n_subcarriers=n_subcarriers,
                   n_symbols=n_symbols, t0=t0, radius=radius, height=height,
                   omega=omega, tc=tc, path_loss=path_loss)

    def is_full_revolution(self) -> bool:
        return abs(self.n_symbols * abs(self.omega) * self.t0 - 2 * math.pi) \
            <= abs(self.omega) * self.t0 * (1 + 1e-9)


def full_revolution_symbols(omega: float, t0: float) -> int:
    """Symbol count for one full revolution, ceil(2*pi / (|omega|*t0)).

    A small tolerance keeps an exact division (e.g. 4000.0000000001) from
    ceiling up to an extra symbol.
    """
    exact = 2 * math.pi / (abs(omega) * t0)
    return int(math.ceil(exact - 1e-9))


def azimuth_angle(cfg: RadarConfig, ell: int) -> float:
    """Azimuth angle omega*t0*ell of symbol ``ell``, unwrapped."""
    if not 0 <= ell < cfg.n_symbols:
        raise ValidationError(
            f"symbol index {ell} out of range [0, {cfg.n_symbols})")
    return cfg.omega * cfg.t0 * ell


def rotation_matrix(phi: float) -> np.ndarray:
    """3x3 rotation about the z-axis by ``phi``."""
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def bs_position(cfg: RadarConfig, ell: int) -> np.ndarray:
    """BS position at symbol ``ell``: R(phi_ell) @ [radius, 0, height]."""
    phi = azimuth_angle(cfg, ell)
    return rotation_matrix(phi) @ np.array([cfg.radius, 0.0, cfg.height])


def doppler_coefficient(cfg: RadarConfig) -> float:
    """Scale factor mapping (-x sin(Phi) + y cos(Phi)) to Doppler [Hz/m]."""
    return 2.0 * cfg.omega / (cfg.wavelength * cfg.elevation_factor)


def doppler_frequency(cfg: RadarConfig, x, y, phi):
    """Doppler frequency of a scatterer at (x, y) seen from azimuth ``phi``.

    Sinusoidal in the azimuth: coef * (-x sin(phi) + y cos(phi)). Accepts
    scalars or broadcastable arrays.
    """
    return doppler_coefficient(cfg) * (-x * np.sin(phi) + y * np.cos(phi))


def unambiguous_radius(cfg: RadarConfig) -> float:
    """Radius of the disc where Doppler sampling at t0 is alias-free."""
    return cfg.wavelength / (4.0 * abs(cfg.omega) * cfg.t0) \
        * cfg.elevation_factor


@dataclass(frozen=True)
class SectorPlan:
    """Azimuth sectorization and Doppler grid parameters.

    ``m_half`` is the per-sector half window in symbols; a sector spans
    2*m_half + 1 consecutive symbols about its center. ``doppler_bins`` must
    be even so the uniform grid -1/(2 t0) + i/(doppler_bins * t0) contains
    the zero-Doppler bin and the bracket quantizer lands exactly on grid.
    """

    k_sectors: int
    delta_sa: float          # small-angle parameter [rad]
    m_half: int
    doppler_bins: int
    f_delta: float           # Doppler grid step, 1/(doppler_bins * t0) [Hz]

    def __post_init__(self):
        if self.k_sectors < 1:
            raise ValidationError("k_sectors must be >= 1")
        if not 0 < self.delta_sa <= MAX_DELTA_SA:
            raise ValidationError(
                "delta_sa must be in (0, 3 degrees]; got "
                f"{math.degrees(self.delta_sa):.3f} deg")
        if self.m_half < 1:
            raise ValidationError("m_half must be >= 1")
        if self.doppler_bins < 2 * self.m_half + 1:
            raise ValidationError(
                "doppler_bins must be >= the sector window 2*m_half + 1")
        if self.doppler_bins % 2 != 0:
            raise ValidationError("doppler_bins must be even")
        if self.f_delta <= 0:
            raise ValidationError("f_delta must be positive")

    @property
    def window(self) -> int:
        """Symbols per sector, 2*m_half + 1."""
        return 2 * self.m_half + 1

    @classmethod
    def from_config(cls, cfg: RadarConfig, delta_sa: float, k_sectors: int,
                    doppler_bins: int) -> "SectorPlan":
        m_half = int(round_half_away(delta_sa / (abs(cfg.omega) * cfg.t0)))
        if 2 * m_half + 1 > cfg.n_symbols:
            raise ValidationError(
                f"sector window {2 * m_half + 1} exceeds n_symbols "
                f"{cfg.n_symbols}")
        return cls(k_sectors=k_sectors, delta_sa=delta_sa, m_half=m_half,
                   doppler_bins=doppler_bins,
                   f_delta=1.0 / (doppler_bins * cfg.t0))

    def sector_centers(self) -> np.ndarray:
        """Azimuth centers Phi_k = 2*pi*k/K, k = 0..K-1."""
        return 2.0 * math.pi * np.arange(self.k_sectors) / self.k_sectors

    def doppler_grid(self, t0: float) -> np.ndarray:
        """Uniform Doppler grid D_i = -1/(2 t0) + i/(doppler_bins * t0)."""
        i = np.arange(self.doppler_bins)
        return -0.5 / t0 + i / (self.doppler_bins * t0)

    def matches(self, cfg: RadarConfig) -> bool:
        """True if this plan was derived from a config compatible with cfg."""
        m = int(round_half_away(self.delta_sa / (abs(cfg.omega) * cfg.t0)))
        return (m == self.m_half
                and abs(self.f_delta * self.doppler_bins * cfg.t0 - 1.0)
                < 1e-9)


@dataclass(frozen=True)
class RoiGrid:
    """Square reconstruction grid centered at the origin, plus the ROI
    cylinder bounds used to validate scene placement.

    Construction fails if any grid point falls outside the unambiguous
    region: silently aliased pixels are worse than a hard error. Scenes (not
    grids) may be placed outside the region for aliasing studies, bounded
    only by the cylinder.
    """

    half_extent: float       # grid spans [-half_extent, half_extent] [m]
    n_cells: int             # per-axis cell count
    roi_radius: float        # cylinder radius R_V [m]
    roi_height: float        # cylinder height H_V [m]
    cell_size: float = field(init=False)

    def __post_init__(self):
        if self.half_extent <= 0:
            raise ValidationError("half_extent must be positive")
        if self.n_cells < 1:
            raise ValidationError("n_cells must be >= 1")
        if self.roi_radius <= 0 or self.roi_height <= 0:
            raise ValidationError("ROI cylinder dimensions must be positive")
        object.__setattr__(self, "cell_size",
                           2.0 * self.half_extent / self.n_cells)

    @classmethod
    def for_config(cls, cfg: RadarConfig, half_extent: float, n_cells: int,
                   roi_radius: float, roi_height: float) -> "RoiGrid":
        grid = cls(half_extent=half_extent, n_cells=n_cells,
                   roi_radius=roi_radius, roi_height=roi_height)
        # farthest cell center sits at (half_extent - cell/2) on both axes
        r_max = math.sqrt(2.0) * (half_extent - grid.cell_size / 2.0)
        r_ua = unambiguous_radius(cfg)
        if r_max > r_ua:
            raise ValidationError(
                f"grid corner radius {r_max:.4f} m exceeds the unambiguous "
                f"region radius {r_ua:.4f} m")
        return grid

    def coords(self) -> np.ndarray:
        """Cell-center coordinates along one axis."""
        i = np.arange(self.n_cells)
        return -self.half_extent + (i + 0.5) * self.cell_size

    def meshgrid(self):
        """(X, Y) cell-center meshes, indexed [iy, ix]."""
        c = self.coords()
        return np.meshgrid(c, c)
