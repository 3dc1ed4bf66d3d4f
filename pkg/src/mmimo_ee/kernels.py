"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

The dominant cost of a sweep is synthesizing ray-sum channel matrices:
for every (UE, sector) link an R-ray x N-element complex phase table is
built, then contracted against per-coherence-block ray coefficients.
Elements sit on a regular column/row grid, so the plane-wave phase
factorizes into a horizontal and a vertical term; the kernel exploits
that to evaluate R*(NC+NZ) complex exponentials instead of R*NC*NZ.

Set MMIMO_EE_NO_NUMBA=1 to force the numpy path (kernels stay
numerically equivalent; see benchmarks/bench_kernels.py for timings).
"""

from __future__ import annotations

import os

import numpy as np

TWO_PI = 2.0 * np.pi


def _env_disabled() -> bool:
    return os.environ.get("MMIMO_EE_NO_NUMBA", "").strip().lower() not in ("", "0", "false")


def ray_element_matrix_numpy(amp: np.ndarray, uy: np.ndarray, uz: np.ndarray,
                             y_pos: np.ndarray, z_pos: np.ndarray) -> np.ndarray:
    """Amplitude-weighted plane-wave phase table, shape (R, NC*NZ).

    amp: per-ray amplitude (R,); uy/uz: ray direction components (R,);
    y_pos/z_pos: element grid coordinates in wavelengths (NC,), (NZ,).
    Entry [r, c*NZ + z] = amp[r] * exp(j*2pi*(uy[r]*y[c] + uz[r]*z[z])).
    """
    ey = np.exp(1j * TWO_PI * np.outer(uy, y_pos))
    ez = np.exp(1j * TWO_PI * np.outer(uz, z_pos))
    e = (amp[:, None, None] * ey[:, :, None]) * ez[:, None, :]
    return e.reshape(amp.shape[0], y_pos.shape[0] * z_pos.shape[0])


_HAVE_NUMBA = False
ray_element_matrix_numba = None

if not _env_disabled():
    try:
        from numba import njit

        @njit(cache=True, fastmath=True)
        def _ray_element_matrix_jit(amp, uy, uz, y_pos, z_pos):  # pragma: no cover - jit
            n_rays = amp.shape[0]
            nc = y_pos.shape[0]
            nz = z_pos.shape[0]
            out = np.empty((n_rays, nc * nz), dtype=np.complex128)
            ey = np.empty(nc, dtype=np.complex128)
            ez = np.empty(nz, dtype=np.complex128)
            for r in range(n_rays):
                for c in range(nc):
                    ph = TWO_PI * uy[r] * y_pos[c]
                    ey[c] = complex(np.cos(ph), np.sin(ph))
                for z in range(nz):
                    ph = TWO_PI * uz[r] * z_pos[z]
                    ez[z] = complex(np.cos(ph), np.sin(ph))
                for c in range(nc):
                    base = amp[r] * ey[c]
                    off = c * nz
                    for z in range(nz):
                        out[r, off + z] = base * ez[z]
            return out

        ray_element_matrix_numba = _ray_element_matrix_jit
        _HAVE_NUMBA = True
    except ImportError:
        pass

USING_NUMBA = _HAVE_NUMBA

if USING_NUMBA:
    ray_element_matrix = ray_element_matrix_numba
else:
    ray_element_matrix = ray_element_matrix_numpy
