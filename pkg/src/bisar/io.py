"""File formats: the binary complex-matrix container (echo cubes and
angle-Doppler dumps), energy-image exports (CSV and 16-bit PGM with a JSON
sidecar), and run manifests.

The binary container is a fixed 128-byte little-endian header followed by
the matrix as interleaved (re, im) float64 pairs, row-major:

    offset  size  field
    0       8     magic "BISARBIN"
    8       4     container version (u32)
    12      4     kind: 0 = echo cube [N x L], 1 = angle-Doppler map [I x K]
    16      8     rows (u64)
    24      8     cols (u64)
    32      64    config hash, hex sha256 (ascii)
    96      4     fidelity: 0 exact, 1 bandlimited, 2 farfield (echo only)
    100     4     data symbol scheme: 0 unit, 1 qpsk (echo only)
    104     8     data symbol seed (u64, echo only)
    112     16    reserved, zero

Round-trips are bit-exact; data symbols are regenerated from the recorded
scheme and seed rather than stored.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .echo import EchoCube, Fidelity, SymbolScheme, gen_data_symbols
from .errors import ValidationError
from .estimators import AngleDopplerMap
from .geometry import RadarConfig, SectorPlan
from .pipeline import EnergyImage

MAGIC = b"BISARBIN"
CONTAINER_VERSION = 1
_HEADER = struct.Struct("<8sII QQ 64s II Q 16s")
assert _HEADER.size == 128

_KIND_ECHO = 0
_KIND_ADMAP = 1
_FIDELITY_CODE = {Fidelity.EXACT: 0, Fidelity.BAND_LIMITED: 1,
                  Fidelity.FAR_FIELD: 2}
_FIDELITY_FROM = {v: k for k, v in _FIDELITY_CODE.items()}
_SCHEME_CODE = {SymbolScheme.UNIT_CONSTANT: 0, SymbolScheme.QPSK: 1}
_SCHEME_FROM = {v: k for k, v in _SCHEME_CODE.items()}


def config_hash(cfg: RadarConfig) -> str:
    """sha256 of the canonical JSON form of a radar config."""
    payload = json.dumps(asdict(cfg), sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _write_container(path, kind: int, matrix: np.ndarray, cfg_hash: str,
                     fidelity: int, scheme: int, seed: int) -> None:
    header = _HEADER.pack(MAGIC, CONTAINER_VERSION, kind,
                          matrix.shape[0], matrix.shape[1],
                          cfg_hash.encode("ascii"), fidelity, scheme,
                          seed, b"\x00" * 16)
    payload = np.ascontiguousarray(matrix, dtype="<c16").tobytes()
    _atomic_write_bytes(path, header + payload)


def _read_container(path, expect_kind: int):
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValidationError(f"{path}: truncated container")
    (magic, version, kind, rows, cols, cfg_hash, fidelity, scheme,
     seed, _) = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ValidationError(f"{path}: bad magic {magic!r}")
    if version != CONTAINER_VERSION:
        raise ValidationError(f"{path}: unsupported version {version}")
    if kind != expect_kind:
        raise ValidationError(f"{path}: container kind {kind} != "
                              f"{expect_kind}")
    n_expected = _HEADER.size + rows * cols * 16
    if len(raw) != n_expected:
        raise ValidationError(f"{path}: size {len(raw)} != {n_expected}")
    matrix = np.frombuffer(raw, dtype="<c16", offset=_HEADER.size) \
        .reshape(rows, cols).copy()
    return matrix, cfg_hash.decode("ascii"), fidelity, scheme, seed


def save_cube(cube: EchoCube, path) -> None:
    _write_container(path, _KIND_ECHO, cube.samples, config_hash(cube.cfg),
                     _FIDELITY_CODE[cube.fidelity],
                     _SCHEME_CODE[cube.symbol_scheme], cube.symbol_seed)


def load_cube(path, cfg: RadarConfig) -> EchoCube:
    """Load an echo cube, checking its header hash against ``cfg``."""
    matrix, stored_hash, fid, scheme, seed = _read_container(path,
                                                             _KIND_ECHO)
    if stored_hash != config_hash(cfg):
        raise ValidationError(
            f"{path}: cube was produced by a different config")
    expected = (cfg.n_subcarriers, cfg.n_symbols)
    if matrix.shape != expected:
        raise ValidationError(f"{path}: cube shape {matrix.shape} != "
                              f"{expected}")
    scheme_enum = _SCHEME_FROM[scheme]
    return EchoCube(samples=matrix,
                    data_symbols=gen_data_symbols(cfg, scheme_enum, seed),
                    cfg=cfg, fidelity=_FIDELITY_FROM[fid],
                    symbol_scheme=scheme_enum, symbol_seed=seed)


def save_admap(map_: AngleDopplerMap, path) -> None:
    _write_container(path, _KIND_ADMAP, map_.g, config_hash(map_.cfg),
                     0, 0, 0)


def load_admap(path, cfg: RadarConfig, plan: SectorPlan,
               estimator: str = "unknown") -> AngleDopplerMap:
    matrix, stored_hash, _, _, _ = _read_container(path, _KIND_ADMAP)
    if stored_hash != config_hash(cfg):
        raise ValidationError(
            f"{path}: map was produced by a different config")
    return AngleDopplerMap(g=matrix, cfg=cfg, plan=plan,
                           estimator=estimator)


# ---------------------------------------------------------------------------
# Energy image exports

def save_image_csv(image: EnergyImage, path) -> None:
    """CSV grid: header row of x coordinates, first column of y values."""
    coords = image.grid.coords()
    lines = ["y\\x," + ",".join(repr(float(x)) for x in coords)]
    for iy in range(image.grid.n_cells):
        row = ",".join(repr(float(v)) for v in image.values[iy])
        lines.append(f"{float(coords[iy])!r},{row}")
    _atomic_write_bytes(path, ("\n".join(lines) + "\n").encode())


def load_image_csv(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Returns (x_coords, y_coords, values[iy, ix])."""
    lines = Path(path).read_text().strip().split("\n")
    xs = np.array([float(v) for v in lines[0].split(",")[1:]])
    ys, rows = [], []
    for line in lines[1:]:
        cells = line.split(",")
        ys.append(float(cells[0]))
        rows.append([float(v) for v in cells[1:]])
    return xs, np.array(ys), np.array(rows)


def save_image_pgm(image: EnergyImage, path, meta_path=None) -> None:
    """16-bit binary PGM, linearly scaled; scale recorded in a JSON sidecar."""
    values = image.values
    vmin, vmax = float(values.min()), float(values.max())
    span = vmax - vmin
    if span == 0.0:
        scaled = np.zeros_like(values, dtype=np.uint16)
    else:
        scaled = np.round((values - vmin) / span * 65535.0).astype(np.uint16)
    n = image.grid.n_cells
    header = f"P5\n{n} {n}\n65535\n".encode()
    _atomic_write_bytes(path, header + scaled.astype(">u2").tobytes())
    if meta_path is None:
        meta_path = str(path) + ".json"
    meta = {"min": vmin, "max": vmax, "n_cells": n,
            "half_extent_m": image.grid.half_extent}
    meta.update({k: v for k, v in image.metadata.items()
                 if isinstance(v, (str, int, float, bool))})
    _atomic_write_bytes(meta_path,
                        (json.dumps(meta, indent=2) + "\n").encode())


def _atomic_write_bytes(path, data: bytes) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


# ---------------------------------------------------------------------------
# Run manifest

class ManifestWriter:
    """Collects stage timings and output checksums; written atomically at
    the end of a run."""

    def __init__(self, config_digest: str, tool_version: str):
        self.config_digest = config_digest
        self.tool_version = tool_version
        self.stages: list[dict] = []
        self.outputs: list[dict] = []

    def add_stage(self, name: str, seconds: float) -> None:
        self.stages.append({"name": name, "seconds": seconds})

    def add_output(self, path) -> None:
        path = Path(path)
        self.outputs.append({
            "path": path.name,
            "sha256": sha256_file(path),
            "bytes": path.stat().st_size,
        })

    def write(self, path) -> None:
        doc = {
            "config_sha256": self.config_digest,
            "tool_version": self.tool_version,
            "stages": self.stages,
            "outputs": sorted(self.outputs, key=lambda o: o["path"]),
        }
        _atomic_write_bytes(path, (json.dumps(doc, indent=2) + "\n").encode())


def load_manifest(path) -> dict:
    return json.loads(Path(path).read_text())
