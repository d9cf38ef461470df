"""Scratch: validate operator conventions before freezing tests."""
import numpy as np

from layersar import em, scene as sc
from layersar.operators import dtfda_reconstruct, forward_project, ImageVolume
from layersar.simulate import PointTarget, synthesize_echo, EchoTensor

def make_scene(eps=1.0, n_tx=4, n_rx=16, n_scan=32, n_freq=16, nx=None, ny=12, nz=None,
               y0=0.0, dy=0.005):
    nx = nx or n_rx
    nz = nz or n_scan
    dx = 0.01
    dz = 0.004
    rx = sc.uniform_axis(-dx*(n_rx-1)/2, dx, n_rx)
    tx = tuple(np.linspace(rx[0], rx[-1], n_tx))
    zz = sc.uniform_axis(-dz*(n_scan-1)/2, dz, n_scan)
    gx = sc.uniform_axis(-dx*(nx-1)/2, dx, nx)
    gz = sc.uniform_axis(-dz*(nz-1)/2, dz, nz)
    gy = sc.uniform_axis(y0, dy, ny)
    cfg = sc.SceneConfig(
        medium=sc.MediumSpec(eps),
        arrays=sc.ArrayGeometry(tx_x=tx, rx_x=rx, aperture_y=-0.25, scan_z=zz),
        sweep=sc.FrequencySweep(31.5e9, 43.5e9, n_freq),
        grid=sc.VoxelGrid(x=gx, y=gy, z=gz),
    )
    return sc.validate(cfg)

# --- free-space round trip ---
s = make_scene(eps=1.0)
tgt = PointTarget(position=(0.012, 0.031, -0.008), reflectivity=1.0)
echo = synthesize_echo(s, [tgt])
img = dtfda_reconstruct(echo, s)
mag = np.abs(img.data)
idx = np.unravel_index(np.argmax(mag), mag.shape)
true_idx = (np.argmin(np.abs(s.grid_x - 0.012)),
            np.argmin(np.abs(s.grid_y - 0.031)),
            np.argmin(np.abs(s.grid_z + 0.008)))
print("free space argmax:", idx, "true:", true_idx)

# --- adjoint test ---
rng = np.random.default_rng(0)
H = ImageVolume(rng.standard_normal(s.image_shape) + 1j*rng.standard_normal(s.image_shape))
Y = EchoTensor(rng.standard_normal(s.echo_shape) + 1j*rng.standard_normal(s.echo_shape))
PH = forward_project(H, s)
PtY = dtfda_reconstruct(Y, s)
lhs = np.vdot(Y.data, PH.data)   # <Y, Psi H>
rhs = np.vdot(PtY.data, H.data)  # <Psi' Y, H>
err = abs(lhs - rhs) / (np.linalg.norm(PH.data) * np.linalg.norm(Y.data))
print("adjoint rel err:", err)

# --- in-medium round trip ---
s2 = make_scene(eps=2.1, y0=0.0, ny=16, dy=0.005)
tgt2 = PointTarget(position=(0.0, 0.04, 0.0))
echo2 = synthesize_echo(s2, [tgt2])
img2 = dtfda_reconstruct(echo2, s2)
mag2 = np.abs(img2.data)
idx2 = np.unravel_index(np.argmax(mag2), mag2.shape)
true2 = (np.argmin(np.abs(s2.grid_x)), np.argmin(np.abs(s2.grid_y - 0.04)),
         np.argmin(np.abs(s2.grid_z)))
print("in-medium argmax:", idx2, "true:", true2)

# refraction-ignoring reconstruction of the same echo
s2f = make_scene(eps=1.0, y0=0.0, ny=16, dy=0.005)
img2f = dtfda_reconstruct(EchoTensor(echo2.data), s2f)
idx2f = np.unravel_index(np.argmax(np.abs(img2f.data)), img2f.data.shape)
print("eps-ignoring argmax:", idx2f, "expected depth shift ~", (np.sqrt(2.1)-1)*0.04/0.005, "voxels")
print("depth profile (refr-aware):", np.round(np.abs(img2.data[idx2[0], :, idx2[2]])/mag2.max(), 3))
print("depth profile (ignoring):", np.round(np.abs(img2f.data[idx2f[0], :, idx2f[2]])/np.abs(img2f.data).max(), 3))
