"""Imaging-scene description and validation.

A scene bundles the dielectric medium, the MIMO aperture geometry, the
stepped-frequency sweep, and the reconstruction voxel grid. ``validate``
turns a :class:`SceneConfig` into an immutable :class:`ValidatedScene`
carrying every derived quantity the simulator and reconstructors need
(wavenumber list, array pitches, spectral axes).

Grid convention: the x and z grid axes are the spectral duals of the
receiver and scan axes -- same pitch, at least as many samples (extra
samples imply zero-padding of the echo inside the spectral operators).
The y (depth) axis is free.
"""

from __future__ import annotations

import hashlib
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import yaml

from . import em
from .errors import (
    BadPermittivity,
    EmptyAxis,
    GridOutsideMedium,
    NonPositiveFrequency,
    NonUniformReceivers,
    NonUniformScan,
    SceneError,
)

#: absolute tolerance (m) on receiver/scan pitch uniformity
UNIFORMITY_TOL = 1e-9


@dataclass(frozen=True)
class MediumSpec:
    """Half-space dielectric below the y = 0 interface plane."""

    relative_permittivity: float = 1.0


@dataclass(frozen=True)
class ArrayGeometry:
    """MIMO array on the air side plus the mechanical scan axis.

    ``tx_x`` may be arbitrarily (non-uniformly) placed; ``rx_x`` and
    ``scan_z`` must be uniform because the reconstruction transforms them
    spectrally. ``aperture_y`` is the standoff plane y = Y < 0.
    """

    tx_x: tuple[float, ...]
    rx_x: tuple[float, ...]
    aperture_y: float
    scan_z: tuple[float, ...]


@dataclass(frozen=True)
class FrequencySweep:
    """Uniform stepped-frequency sweep, inclusive of both endpoints."""

    f_min: float
    f_max: float
    n_freq: int

    def frequencies(self) -> np.ndarray:
        return np.linspace(self.f_min, self.f_max, self.n_freq)


@dataclass(frozen=True)
class VoxelGrid:
    """Reconstruction grid axes (meters), strictly increasing and uniform."""

    x: tuple[float, ...]
    y: tuple[float, ...]
    z: tuple[float, ...]


@dataclass(frozen=True)
class SceneConfig:
    medium: MediumSpec
    arrays: ArrayGeometry
    sweep: FrequencySweep
    grid: VoxelGrid
    wave_impedance: float = em.FREE_SPACE_IMPEDANCE


def _pitch(values: np.ndarray, exc: type[SceneError], label: str) -> float:
    diffs = np.diff(values)
    mean = float(np.mean(diffs))
    if mean <= 0.0:
        raise exc(f"{label} must be ascending with positive pitch")
    if float(np.max(np.abs(diffs - mean))) >= UNIFORMITY_TOL:
        raise exc(
            f"{label} spacing deviates from uniform by more than "
            f"{UNIFORMITY_TOL} m"
        )
    return mean


def _uniform_axis(values: np.ndarray, label: str) -> float:
    """Pitch of a strictly increasing uniform grid axis (0.0 if singleton)."""
    if values.size == 0:
        raise EmptyAxis(f"{label} axis is empty")
    if values.size == 1:
        return 0.0
    diffs = np.diff(values)
    if np.any(diffs <= 0.0):
        raise SceneError(f"{label} axis must be strictly increasing")
    mean = float(np.mean(diffs))
    if float(np.max(np.abs(diffs - mean))) > 1e-9 * max(1.0, abs(mean)):
        raise SceneError(f"{label} axis must be uniformly spaced")
    return mean


def spectral_axis(n: int, pitch: float) -> np.ndarray:
    """Discrete wavenumber axis dual to ``n`` samples at spacing ``pitch``.

    FFT-natural (unshifted) order: index m carries 2*pi*m/(n*pitch) for
    m < n/2 and the wrapped negative frequencies above. Spans
    [-pi/pitch, pi/pitch).
    """
    return 2.0 * math.pi * np.fft.fftfreq(n, d=pitch)


@dataclass(frozen=True)
class ValidatedScene:
    """Frozen scene with derived quantities; shareable across workers."""

    config: SceneConfig
    eps: float
    eta0: float
    aperture_y: float
    tx_x: np.ndarray
    rx_x: np.ndarray
    scan_z: np.ndarray
    dx_rx: float
    dz_scan: float
    freqs: np.ndarray
    k_list: np.ndarray
    grid_x: np.ndarray
    grid_y: np.ndarray
    grid_z: np.ndarray
    dy_grid: float
    k_xr_axis: np.ndarray = field(repr=False)
    k_z_axis: np.ndarray = field(repr=False)
    k_xr_grid: np.ndarray = field(repr=False)
    k_z_grid: np.ndarray = field(repr=False)

    @property
    def n_tx(self) -> int:
        return self.tx_x.size

    @property
    def n_rx(self) -> int:
        return self.rx_x.size

    @property
    def n_scan(self) -> int:
        return self.scan_z.size

    @property
    def n_freq(self) -> int:
        return self.freqs.size

    @property
    def echo_shape(self) -> tuple[int, int, int, int]:
        return (self.n_tx, self.n_rx, self.n_scan, self.n_freq)

    @property
    def image_shape(self) -> tuple[int, int, int]:
        return (self.grid_x.size, self.grid_y.size, self.grid_z.size)

    @property
    def standoff(self) -> float:
        """Height of the aperture above the interface, |Y|."""
        return -self.aperture_y

    def fingerprint(self) -> str:
        """Stable hash of the configuration, for provenance records."""
        c = self.config
        payload = {
            "eps": c.medium.relative_permittivity,
            "tx_x": list(c.arrays.tx_x),
            "rx_x": list(c.arrays.rx_x),
            "aperture_y": c.arrays.aperture_y,
            "scan_z": list(c.arrays.scan_z),
            "sweep": [c.sweep.f_min, c.sweep.f_max, c.sweep.n_freq],
            "grid": [list(c.grid.x), list(c.grid.y), list(c.grid.z)],
            "eta0": c.wave_impedance,
        }
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def validate(config: SceneConfig | ValidatedScene) -> ValidatedScene:
    """Check every scene invariant and precompute derived quantities.

    Idempotent: validating an already-validated scene's config yields an
    identical scene.
    """
    if isinstance(config, ValidatedScene):
        config = config.config

    eps = float(config.medium.relative_permittivity)
    if eps < 1.0:
        raise BadPermittivity(f"relative permittivity must be >= 1, got {eps}")

    arrays = config.arrays
    tx_x = np.asarray(arrays.tx_x, dtype=float)
    rx_x = np.asarray(arrays.rx_x, dtype=float)
    scan_z = np.asarray(arrays.scan_z, dtype=float)
    if tx_x.size < 1:
        raise EmptyAxis("need at least one transmitter")
    if rx_x.size < 2:
        raise EmptyAxis("need at least two receivers to define a pitch")
    if scan_z.size < 2:
        raise EmptyAxis("need at least two scan positions to define a pitch")
    aperture_y = float(arrays.aperture_y)
    if aperture_y >= 0.0:
        raise SceneError(
            f"aperture must sit on the air side (y < 0), got y={aperture_y}"
        )
    dx_rx = _pitch(rx_x, NonUniformReceivers, "receiver x positions")
    dz_scan = _pitch(scan_z, NonUniformScan, "scan z positions")

    sweep = config.sweep
    if sweep.n_freq < 1:
        raise EmptyAxis("need at least one frequency")
    if sweep.f_min <= 0.0:
        raise NonPositiveFrequency(f"f_min must be > 0, got {sweep.f_min}")
    if sweep.n_freq > 1 and not sweep.f_min < sweep.f_max:
        raise SceneError("f_min must be below f_max")
    freqs = sweep.frequencies()
    k_list = np.array([em.wavenumber(f) for f in freqs])

    grid_x = np.asarray(config.grid.x, dtype=float)
    grid_y = np.asarray(config.grid.y, dtype=float)
    grid_z = np.asarray(config.grid.z, dtype=float)
    dx_grid = _uniform_axis(grid_x, "grid x")
    dy_grid = _uniform_axis(grid_y, "grid y")
    dz_grid = _uniform_axis(grid_z, "grid z")
    if eps > 1.0 and float(grid_y[0]) < 0.0:
        raise GridOutsideMedium(
            "grid depth axis reaches y < 0 while the medium is dielectric"
        )
    if float(grid_y[0]) <= aperture_y:
        raise SceneError(
            "grid depth axis must stay below the aperture plane "
            f"(y > {aperture_y})"
        )
    if grid_x.size < rx_x.size:
        raise SceneError("grid x axis needs at least as many samples as receivers")
    if grid_z.size < scan_z.size:
        raise SceneError("grid z axis needs at least as many samples as scan positions")
    if not math.isclose(dx_grid, dx_rx, rel_tol=1e-9):
        raise SceneError(
            f"grid x pitch {dx_grid} must equal receiver pitch {dx_rx} "
            "(spectrally matched grids)"
        )
    if not math.isclose(dz_grid, dz_scan, rel_tol=1e-9):
        raise SceneError(
            f"grid z pitch {dz_grid} must equal scan pitch {dz_scan} "
            "(spectrally matched grids)"
        )

    # the x-domain spectral window repeats with period n_x * dx_rx; a grid
    # centered far from the receive aperture wraps around rather than failing
    window = grid_x.size * dx_rx
    offset = abs(
        (grid_x[0] + grid_x[-1]) / 2.0 - (rx_x[0] + rx_x[-1]) / 2.0
    )
    if offset > window / 2.0:
        warnings.warn(
            "grid x extent lies outside the unambiguous window implied by "
            f"the receiver sampling (offset {offset:.4g} m > {window / 2.0:.4g} m); "
            "expect wraparound",
            stacklevel=2,
        )

    return ValidatedScene(
        config=config,
        eps=eps,
        eta0=float(config.wave_impedance),
        aperture_y=aperture_y,
        tx_x=tx_x,
        rx_x=rx_x,
        scan_z=scan_z,
        dx_rx=dx_rx,
        dz_scan=dz_scan,
        freqs=freqs,
        k_list=k_list,
        grid_x=grid_x,
        grid_y=grid_y,
        grid_z=grid_z,
        dy_grid=dy_grid,
        k_xr_axis=spectral_axis(rx_x.size, dx_rx),
        k_z_axis=spectral_axis(scan_z.size, dz_scan),
        k_xr_grid=spectral_axis(grid_x.size, dx_rx),
        k_z_grid=spectral_axis(grid_z.size, dz_scan),
    )


def spectral_axes(scene: ValidatedScene) -> tuple[np.ndarray, np.ndarray]:
    """Wavenumber axes dual to the receiver and scan axes (FFT-natural order)."""
    return scene.k_xr_axis, scene.k_z_axis


def uniform_axis(start: float, step: float, count: int) -> tuple[float, ...]:
    """Uniform coordinate axis as a tuple (convenience for configs)."""
    return tuple(start + step * i for i in range(count))


def default_depth_step(sweep: FrequencySweep, eps: float) -> float:
    """Range-resolution heuristic c / (2 * bandwidth * sqrt(eps))."""
    bandwidth = sweep.f_max - sweep.f_min
    if bandwidth <= 0.0:
        raise SceneError("depth-step heuristic needs a positive bandwidth")
    return em.SPEED_OF_LIGHT / (2.0 * bandwidth * math.sqrt(eps))


def _axis_values(spec, default_step=None, default_count=None, label="axis"):
    if isinstance(spec, (list, tuple)):
        return tuple(float(v) for v in spec)
    if not isinstance(spec, dict):
        raise SceneError(f"{label}: expected a list or a start/step/count mapping")
    start = float(spec["start"])
    step = spec.get("step", default_step)
    if step is None:
        raise SceneError(f"{label}: 'step' missing and no default applies")
    step = float(step)
    if "count" in spec:
        count = int(spec["count"])
    elif "stop" in spec:
        count = int(math.floor((float(spec["stop"]) - start) / step + 1e-9)) + 1
    elif default_count is not None:
        count = int(default_count)
    else:
        raise SceneError(f"{label}: need 'count' or 'stop'")
    if count < 1:
        raise EmptyAxis(f"{label}: count must be >= 1")
    return uniform_axis(start, step, count)


def config_from_dict(raw: dict) -> SceneConfig:
    """Build a :class:`SceneConfig` from the nested mapping of a config file."""
    try:
        medium = MediumSpec(float(raw["medium"]["relative_permittivity"]))
        arr = raw["arrays"]
        tx_x = _axis_values(arr["tx_x"], label="arrays.tx_x")
        rx_x = _axis_values(arr["rx_x"], label="arrays.rx_x")
        scan_z = _axis_values(arr["scan_z"], label="arrays.scan_z")
        arrays = ArrayGeometry(
            tx_x=tx_x,
            rx_x=rx_x,
            aperture_y=float(arr["aperture_y"]),
            scan_z=scan_z,
        )
        sw = raw["sweep"]
        sweep = FrequencySweep(float(sw["f_min"]), float(sw["f_max"]), int(sw["n_freq"]))
        g = raw["grid"]
        dx = rx_x[1] - rx_x[0] if len(rx_x) > 1 else None
        dz = scan_z[1] - scan_z[0] if len(scan_z) > 1 else None
        grid = VoxelGrid(
            x=_axis_values(g["x"], default_step=dx, default_count=len(rx_x), label="grid.x"),
            y=_axis_values(
                g["y"],
                default_step=default_depth_step(sweep, medium.relative_permittivity),
                label="grid.y",
            ),
            z=_axis_values(g["z"], default_step=dz, default_count=len(scan_z), label="grid.z"),
        )
    except KeyError as missing:
        raise SceneError(f"config is missing required key {missing}") from None
    eta0 = float(raw.get("wave_impedance", em.FREE_SPACE_IMPEDANCE))
    return SceneConfig(medium=medium, arrays=arrays, sweep=sweep, grid=grid, wave_impedance=eta0)


def load_config(path) -> SceneConfig:
    """Read a YAML scene configuration file."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise SceneError(f"{path}: top level must be a mapping")
    return config_from_dict(raw)


def load_scene(path) -> ValidatedScene:
    """Read and validate a YAML scene configuration file."""
    return validate(load_config(path))
