"""Matrix-free spectral imaging operators for the layered-medium geometry.

``dtfda_reconstruct`` is the fast frequency-domain reconstructor: per
(transmitter, frequency) it transforms the echo over the receiver and scan
axes, migrates each depth slice with two unit-modulus phase maps, and
coherently accumulates the sub-images. ``forward_project`` is its exact
adjoint (image -> echo). Both are linear, never materialize a sensing
matrix, and -- with the unitary transform convention used throughout --
satisfy <forward(H), Y> == <H, adjoint(Y)> to machine precision.

Transform convention: all FFTs are unitary (1/sqrt(N) each way) and
"anchored" to the physical coordinates of their axes, i.e. they include the
linear phase that maps sample indices to absolute positions. This keeps the
image grid free to sit anywhere (at the receiver pitch) while the operator
pair stays exactly adjoint.

Echo axes may be shorter than the grid axes; the echo is then zero-padded
before the spectral transforms (and the adjoint truncates), which is the
usual spectral-interpolation trick for imaging on a finer-count grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import em
from .errors import DimensionMismatch
from .scene import ValidatedScene
from .simulate import EchoTensor, echo_axes


@dataclass
class ImageVolume:
    """3-D complex reflectivity map indexed (x, y, z) on the scene grid."""

    data: np.ndarray
    provenance: str = ""
    axes: tuple | None = field(default=None, repr=False)

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.data.shape

    def __post_init__(self):
        if self.data.ndim != 3:
            raise DimensionMismatch(
                f"image volume must be 3-D (x, y, z), got {self.data.shape}"
            )


def image_axes(scene: ValidatedScene) -> tuple:
    return (
        (float(scene.grid_x[0]), scene.dx_rx, "m"),
        (float(scene.grid_y[0]), scene.dy_grid, "m"),
        (float(scene.grid_z[0]), scene.dz_scan, "m"),
    )


def _axis_ramp(k_axis: np.ndarray, origin: float, sign: float, ndim: int, axis: int) -> np.ndarray:
    ramp = np.exp(sign * 1j * k_axis * origin)
    shape = [1] * ndim
    shape[axis] = k_axis.size
    return ramp.reshape(shape)


def fft_anchored(a: np.ndarray, axis: int, k_axis: np.ndarray, origin: float) -> np.ndarray:
    """Unitary forward transform along ``axis`` for samples anchored at ``origin``.

    Computes G_m = N^{-1/2} * sum_n a_n exp(-j k_m (origin + n*pitch)); the
    exact inverse and adjoint is :func:`ifft_anchored` with the same anchor.
    """
    n = a.shape[axis]
    out = np.fft.fft(a, axis=axis) / math.sqrt(n)
    out *= _axis_ramp(k_axis, origin, -1.0, a.ndim, axis)
    return out


def ifft_anchored(a: np.ndarray, axis: int, k_axis: np.ndarray, origin: float) -> np.ndarray:
    """Unitary inverse of :func:`fft_anchored`, evaluating at ``origin``-anchored samples."""
    n = a.shape[axis]
    out = a * _axis_ramp(k_axis, origin, +1.0, a.ndim, axis)
    return np.fft.ifft(out, axis=axis) * math.sqrt(n)


@dataclass(frozen=True)
class PhaseSet:
    """Per-(transmitter, wavenumber) compensation maps for one reconstruction pass.

    ``rx_depth[iy]`` lives on the (k_x, k_z) spectral grid and migrates the
    receive-side spectrum from the aperture plane to depth slice iy.
    ``tx_path[iy]`` lives on the (x, k_z) mixed grid and carries the
    transmit-side refracted-path phase to every image column of that slice.
    Entries of either map are unit modulus where propagating and exactly 0
    where the matching mask flags an evanescent spectral sample.
    """

    rx_depth: np.ndarray  # (n_y, n_x, n_z) complex
    tx_path: np.ndarray  # (n_y, n_x, n_z) complex
    rx_mask: np.ndarray  # (n_x, n_z) bool, True where propagating
    tx_mask: np.ndarray  # (n_z,) bool
    k: float
    tx_index: int


def transmit_path_lengths(scene: ValidatedScene, tx_index: int) -> tuple[np.ndarray, np.ndarray]:
    """In-plane refracted path lengths from one transmitter to every image column.

    Returns (air leg, medium leg) arrays of shape (n_x, n_y). These depend
    only on geometry, so one result serves every wavenumber.
    """
    x_t = float(scene.tx_x[tx_index])
    standoff = scene.standoff
    horiz = np.abs(x_t - scene.grid_x)[:, None] * np.ones_like(scene.grid_y)[None, :]
    depth = np.broadcast_to(scene.grid_y[None, :], horiz.shape)
    if scene.eps == 1.0:
        # straight rays; keep the interface split where it exists so the
        # two legs remain individually meaningful for y >= 0
        vert = depth + standoff
        with np.errstate(invalid="ignore", divide="ignore"):
            frac = np.where(depth >= 0.0, standoff / vert, 1.0)
        d = horiz * frac
        r_air = np.hypot(d, np.where(depth >= 0.0, standoff, vert))
        r_med = np.where(depth >= 0.0, np.hypot(horiz - d, depth), 0.0)
        return r_air, r_med
    d = em.unique_crossing_offsets(horiz, depth, standoff, scene.eps)
    return np.hypot(d, standoff), np.hypot(horiz - d, depth)


def build_phase_maps(
    scene: ValidatedScene,
    k: float,
    tx_index: int,
    _lengths: tuple[np.ndarray, np.ndarray] | None = None,
) -> PhaseSet:
    """Assemble the compensation maps for one (transmitter, wavenumber) pair."""
    if _lengths is None:
        _lengths = transmit_path_lengths(scene, tx_index)
    r_air, r_med = _lengths  # (n_x, n_y)
    k_eps = math.sqrt(scene.eps) * k
    kx = scene.k_xr_grid
    kz = scene.k_z_grid
    y = scene.grid_y
    aperture_y = scene.aperture_y

    half_sq = (0.5 * kz) ** 2  # (n_z,)
    rad_tx_air = k * k - half_sq
    rad_tx_med = k_eps * k_eps - half_sq
    tx_mask = (rad_tx_air >= 0.0) & (rad_tx_med >= 0.0)
    kx_air = np.sqrt(np.maximum(rad_tx_air, 0.0))
    kx_med = np.sqrt(np.maximum(rad_tx_med, 0.0))

    rad_rx_air = k * k - kx[:, None] ** 2 - half_sq[None, :]
    rad_rx_med = k_eps * k_eps - kx[:, None] ** 2 - half_sq[None, :]
    rx_mask = (rad_rx_air >= 0.0) & (rad_rx_med >= 0.0)
    ky_air = np.sqrt(np.maximum(rad_rx_air, 0.0))
    ky_med = np.sqrt(np.maximum(rad_rx_med, 0.0))

    rx_depth = np.exp(
        1j * (ky_med[None, :, :] * y[:, None, None] - ky_air[None, :, :] * aperture_y)
    )
    rx_depth *= rx_mask[None, :, :]

    phase_tx = (
        r_air.T[:, :, None] * kx_air[None, None, :]
        + r_med.T[:, :, None] * kx_med[None, None, :]
    )
    tx_path = np.exp(1j * phase_tx)
    tx_path *= tx_mask[None, None, :]

    return PhaseSet(
        rx_depth=rx_depth,
        tx_path=tx_path,
        rx_mask=rx_mask,
        tx_mask=tx_mask,
        k=k,
        tx_index=tx_index,
    )


def _check_echo(echo: EchoTensor, scene: ValidatedScene) -> None:
    if echo.dims != scene.echo_shape:
        raise DimensionMismatch(
            f"echo dims {echo.dims} do not match scene {scene.echo_shape}"
        )


def _check_image(image: ImageVolume, scene: ValidatedScene) -> None:
    if image.dims != scene.image_shape:
        raise DimensionMismatch(
            f"image dims {image.dims} do not match scene grid {scene.image_shape}"
        )


def dtfda_reconstruct(echo: EchoTensor, scene: ValidatedScene) -> ImageVolume:
    """Fast frequency-domain image formation (the inverse sensing operator).

    Per (transmitter, wavenumber): 2-D spectral transform over (receiver,
    scan), receive-side depth migration per y slice, inverse transform to
    the image x axis, transmit-path compensation, inverse transform to the
    image z axis; sub-images are weighted by 1/(j*eta0*k) and summed in
    fixed (tx outer, k inner, ascending) order.
    """
    _check_echo(echo, scene)
    n_x, n_y, n_z = scene.image_shape
    n_rx, n_scan = scene.n_rx, scene.n_scan
    rx0 = float(scene.rx_x[0])
    z0 = float(scene.scan_z[0])
    gx0 = float(scene.grid_x[0])
    gz0 = float(scene.grid_z[0])
    kxg, kzg = scene.k_xr_grid, scene.k_z_grid

    img = np.zeros((n_x, n_y, n_z), dtype=np.complex128)
    slab = np.zeros((n_x, n_z), dtype=np.complex128)
    for tx in range(scene.n_tx):
        lengths = transmit_path_lengths(scene, tx)
        for ik, k in enumerate(scene.k_list):
            ps = build_phase_maps(scene, k, tx, _lengths=lengths)
            slab[:] = 0.0
            slab[:n_rx, :n_scan] = echo.data[tx, :, :, ik]
            spec = fft_anchored(slab, 0, kxg, rx0)
            spec = fft_anchored(spec, 1, kzg, z0)
            stack = spec[None, :, :] * ps.rx_depth
            stack = ifft_anchored(stack, 1, kxg, gx0)
            stack *= ps.tx_path
            stack = ifft_anchored(stack, 2, kzg, gz0)
            img += stack.transpose(1, 0, 2) * (1.0 / (1j * scene.eta0 * k))
    return ImageVolume(
        data=img,
        provenance=f"dtfda: scene {scene.fingerprint()[:12]}",
        axes=image_axes(scene),
    )


def forward_project(image: ImageVolume, scene: ValidatedScene) -> EchoTensor:
    """Exact adjoint of :func:`dtfda_reconstruct` (the forward sensing operator)."""
    _check_image(image, scene)
    n_rx, n_scan = scene.n_rx, scene.n_scan
    rx0 = float(scene.rx_x[0])
    z0 = float(scene.scan_z[0])
    gx0 = float(scene.grid_x[0])
    gz0 = float(scene.grid_z[0])
    kxg, kzg = scene.k_xr_grid, scene.k_z_grid

    # the z-axis transform of the image stack is (tx, k)-independent
    stack_z = fft_anchored(image.data.transpose(1, 0, 2), 2, kzg, gz0)
    echo = np.zeros(scene.echo_shape, dtype=np.complex128)
    for tx in range(scene.n_tx):
        lengths = transmit_path_lengths(scene, tx)
        for ik, k in enumerate(scene.k_list):
            ps = build_phase_maps(scene, k, tx, _lengths=lengths)
            stack = stack_z * np.conj(ps.tx_path)
            stack = fft_anchored(stack, 1, kxg, gx0)
            stack *= np.conj(ps.rx_depth)
            spec = stack.sum(axis=0)
            spec = ifft_anchored(spec, 0, kxg, rx0)
            spec = ifft_anchored(spec, 1, kzg, z0)
            echo[tx, :, :, ik] = spec[:n_rx, :n_scan] * np.conj(1.0 / (1j * scene.eta0 * k))
    return EchoTensor(
        data=echo,
        provenance=f"forward_project: scene {scene.fingerprint()[:12]}",
        axes=echo_axes(scene),
    )
