"""Doppler-only SAR/ISAR imaging: narrowband OFDM echo simulation and
incoherent angle-Doppler reconstruction with resolution analysis."""

__version__ = "0.1.0"

from .echo import (EchoCube, Fidelity, NoiseSpec, SymbolScheme, add_awgn,
                   gen_data_symbols, synthesize_bandlimited,
                   synthesize_exact, synthesize_farfield)
from .errors import NumericalError, ValidationError
from .estimators import (AngleDopplerMap, RangeCompressed, estimate_dft,
                         estimate_iaa)
from .geometry import (RadarConfig, RoiGrid, SectorPlan, azimuth_angle,
                       bs_position, doppler_frequency, unambiguous_radius)
from .pipeline import (EnergyImage, SectorCube, associate, associate_points,
                       image_narrowband, image_wideband, range_compress,
                       reshape_sectors)
from .resolution import (ResolutionReport, benchmark_resolution,
                         equivalent_bandwidth, measure_resolution,
                         numerical_psf, resolution_sweep)
from .scene import (Isotropic, Lobed, Scatterer, Scene, SectoredRandom,
                    eval_scattering, load_scene, project_to_2d, save_scene)

__all__ = [
    "AngleDopplerMap", "EchoCube", "EnergyImage", "Fidelity", "Isotropic",
    "Lobed", "NoiseSpec", "NumericalError", "RadarConfig", "RangeCompressed",
    "ResolutionReport", "RoiGrid", "Scatterer", "Scene", "SectorCube",
    "SectorPlan", "SectoredRandom", "SymbolScheme", "ValidationError",
    "add_awgn", "associate", "associate_points", "azimuth_angle",
    "benchmark_resolution", "bs_position", "doppler_frequency",
    "equivalent_bandwidth", "estimate_dft", "estimate_iaa",
    "eval_scattering", "gen_data_symbols", "image_narrowband",
    "image_wideband", "load_scene", "measure_resolution", "numerical_psf",
    "project_to_2d", "range_compress", "reshape_sectors",
    "resolution_sweep", "save_scene", "synthesize_bandlimited",
    "synthesize_exact", "synthesize_farfield", "unambiguous_radius",
]
