"""Physical echo synthesis for point scatterers behind the interface.

Single-scattering model: each echo sample is j * eta0 * k times the sum over
targets of reflectivity times the product of the transmit-side and
receive-side propagation factors exp(-j * (k * R_air + k_eps * R_med)),
with the refracted path lengths from the Fermat solve. No amplitude
spreading is applied (phase-only propagation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import em
from .errors import DimensionMismatch, SameSide, TensorSizeError
from .scene import ValidatedScene

#: refuse to allocate echo tensors larger than this (bytes)
MAX_ECHO_BYTES = 4 << 30


@dataclass(frozen=True)
class PointTarget:
    """Ideal point scatterer at ``position`` with complex ``reflectivity``."""

    position: tuple[float, float, float]
    reflectivity: complex = 1.0 + 0.0j


@dataclass
class EchoTensor:
    """4-D complex echo cube indexed (tx, rx, scan, freq)."""

    data: np.ndarray
    provenance: str = ""
    axes: tuple | None = field(default=None, repr=False)

    @property
    def dims(self) -> tuple[int, int, int, int]:
        return self.data.shape

    def __post_init__(self):
        if self.data.ndim != 4:
            raise DimensionMismatch(
                f"echo tensor must be 4-D (tx, rx, scan, freq), got {self.data.shape}"
            )


def echo_axes(scene: ValidatedScene) -> tuple:
    """(start, step, unit) descriptors for the four echo axes.

    The tx axis is non-uniform in general and is described as an index axis.
    """
    df = (scene.freqs[1] - scene.freqs[0]) if scene.n_freq > 1 else 0.0
    return (
        (0.0, 1.0, "index"),
        (float(scene.rx_x[0]), scene.dx_rx, "m"),
        (float(scene.scan_z[0]), scene.dz_scan, "m"),
        (float(scene.freqs[0]), float(df), "Hz"),
    )


def green_one_way(scene: ValidatedScene, k: float, antenna, target, side: str = "transmit") -> complex:
    """One-way propagation factor exp(-j(k*R_air + k_eps*R_med)) through the interface.

    ``antenna`` is an aperture-plane point (x, Y, z), ``target`` a scene
    point. Transmit and receive sides use the same formula, each with its
    own refraction solve; the ``side`` argument only labels error messages.
    """
    if side not in ("transmit", "receive"):
        raise ValueError(f"side must be 'transmit' or 'receive', got {side!r}")
    ax, ay, az = (float(v) for v in antenna)
    tx, ty, tz = (float(v) for v in target)
    if scene.eps == 1.0:
        dist = math.dist((ax, ay, az), (tx, ty, tz))
        return complex(np.exp(-1j * k * dist))
    sol = em.solve_refraction((ax, ay, az), (tx, ty, tz), scene.eps)
    k_eps = em.medium_wavenumber(k, scene.eps)
    return complex(np.exp(-1j * (k * sol.r_air + k_eps * sol.r_med)))


def _check_echo_size(scene: ValidatedScene, max_bytes: int) -> None:
    n_tx, n_rx, n_scan, n_freq = scene.echo_shape
    need = 16 * n_tx * n_rx * n_scan * n_freq
    if need > max_bytes:
        raise TensorSizeError(
            f"echo tensor {scene.echo_shape} would need {need} bytes "
            f"(limit {max_bytes})"
        )


def _one_way_lengths(scene: ValidatedScene, antenna_x: np.ndarray, target) -> np.ndarray:
    """Optical lengths antenna -> target for every (antenna_x, scan_z) pair."""
    tx_, ty_, tz_ = target
    if scene.eps > 1.0 and ty_ < 0.0:
        raise SameSide(
            f"target at y={ty_} lies on the air side of a dielectric scene"
        )
    horiz = np.hypot(
        antenna_x[:, None] - tx_,
        scene.scan_z[None, :] - tz_,
    )
    return em.optical_lengths(horiz, ty_, scene.standoff, scene.eps)


def synthesize_echo(
    scene: ValidatedScene,
    targets: list[PointTarget],
    max_bytes: int = MAX_ECHO_BYTES,
) -> EchoTensor:
    """Simulate the full echo tensor for a collection of point targets.

    Superposition over targets of the two-way phase model; deterministic.
    """
    if not targets:
        raise ValueError("need at least one target")
    _check_echo_size(scene, max_bytes)
    lo = np.array([scene.grid_x[0], scene.grid_y[0], scene.grid_z[0]])
    hi = np.array([scene.grid_x[-1], scene.grid_y[-1], scene.grid_z[-1]])
    data = np.zeros(scene.echo_shape, dtype=np.complex128)
    k = scene.k_list
    for t in targets:
        pos = np.asarray(t.position, dtype=float)
        if np.any(pos < lo) or np.any(pos > hi):
            import warnings

            warnings.warn(
                f"target at {tuple(pos)} lies outside the voxel-grid bounding box",
                stacklevel=2,
            )
        if t.reflectivity == 0:
            continue
        length_t = _one_way_lengths(scene, scene.tx_x, t.position)  # (n_tx, n_scan)
        length_r = _one_way_lengths(scene, scene.rx_x, t.position)  # (n_rx, n_scan)
        total = length_t[:, None, :, None] + length_r[None, :, :, None]
        data += (1j * scene.eta0 * t.reflectivity) * k * np.exp(-1j * total * k)
    return EchoTensor(
        data=data,
        provenance=f"synthesize_echo: {len(targets)} target(s), scene {scene.fingerprint()[:12]}",
        axes=echo_axes(scene),
    )


def add_noise(echo: EchoTensor, snr_db: float, seed: int) -> EchoTensor:
    """Add circular complex white noise at the requested SNR.

    ``snr_db = inf`` is the no-noise sentinel and returns an identical copy.
    Deterministic for a fixed seed.
    """
    if not np.all(np.isfinite(echo.data)):
        raise ValueError("echo tensor contains non-finite entries")
    if math.isinf(snr_db) and snr_db > 0:
        return EchoTensor(data=echo.data.copy(), provenance=echo.provenance, axes=echo.axes)
    signal_power = float(np.mean(np.abs(echo.data) ** 2))
    noise_power = signal_power / (10.0 ** (snr_db / 10.0))
    rng = np.random.default_rng(seed)
    shape = echo.data.shape
    sigma = math.sqrt(noise_power / 2.0)
    noise = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return EchoTensor(
        data=echo.data + sigma * noise,
        provenance=f"{echo.provenance} + noise(snr={snr_db} dB, seed={seed})",
        axes=echo.axes,
    )
