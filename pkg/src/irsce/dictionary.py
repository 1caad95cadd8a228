"""Angular-domain dictionaries for UPAs.

Column ``g = gx * Gy + gy`` of a dictionary is the Kronecker product of DFT
column ``gx`` (horizontal) and ``gy`` (vertical), truncated to the array
rows and scaled by ``sqrt(n / G)``. A column is proportional to the steering
vector whose spatial frequencies are ``u = sin(theta) = -2 gx'/Gx`` and
``v = cos(theta) sin(phi) = -2 gy'/Gy`` with ``g'`` wrapped into
``(-G/2, G/2]``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import AnglePair, ArrayDims, as_dims


class GridTooSmall(ValueError):
    pass


def dft_rows(n_rows: int, size: int) -> np.ndarray:
    """First ``n_rows`` rows of the unitary ``size``-point DFT matrix."""
    m = np.arange(n_rows)[:, None]
    g = np.arange(size)[None, :]
    return np.exp(-2j * np.pi * m * g / size) / np.sqrt(size)


def wrapped_index(size: int) -> np.ndarray:
    g = np.arange(size)
    return np.where(g > size // 2, g - size, g)


def spatial_freqs(size: int) -> np.ndarray:
    """Spatial frequency (``sin`` axis) of each DFT column, in ``[-1, 1)``."""
    return -2.0 * wrapped_index(size) / size


@dataclass(frozen=True)
class Dictionary:
    matrix: np.ndarray
    dims: ArrayDims
    grid_shape: tuple

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def size(self) -> int:
        return self.matrix.shape[1]

    @property
    def redundancy(self) -> float:
        return self.size / self.n

    def freqs(self) -> np.ndarray:
        """``(G, 2)`` array of (horizontal, vertical) spatial frequencies."""
        gx, gy = self.grid_shape
        u = np.repeat(spatial_freqs(gx), gy)
        v = np.tile(spatial_freqs(gy), gx)
        return np.stack([u, v], axis=1)

    @property
    def grid(self) -> list:
        """Physical angle of every column, ``None`` where no real angle maps to it."""
        out = []
        for u, v in self.freqs():
            theta = float(np.arcsin(u))
            c = np.cos(theta)
            if c <= 0 or abs(v) >= c:
                out.append(None)
                continue
            out.append(AnglePair(theta, float(np.arcsin(v / c))))
        return out


def redundant_dictionary(dims, grid) -> Dictionary:
    dims = as_dims(dims)
    gx, gy = (int(v) for v in grid)
    if gx < dims.nx or gy < dims.ny:
        raise GridTooSmall(f"grid ({gx}, {gy}) smaller than array ({dims.nx}, {dims.ny})")
    g = gx * gy
    mat = np.sqrt(dims.n / g) * np.kron(dft_rows(dims.nx, gx), dft_rows(dims.ny, gy))
    return Dictionary(mat, dims, (gx, gy))


def on_grid_angles(dims, oversampling, limit: float) -> list:
    """Grid angles of the dictionary that fall inside ``|theta|, |phi| < limit``."""
    dims = as_dims(dims)
    ox, oy = oversampling
    d = redundant_dictionary(dims, (dims.nx * ox, dims.ny * oy))
    return [a for a in d.grid if a is not None and abs(a.theta) < limit and abs(a.phi) < limit]


@dataclass(frozen=True)
class EffectiveDictionary:
    """Block-diagonal map from angular coefficients to ``[h_d; h_r]``."""

    psi: np.ndarray
    m: int   # BS antennas (rows of the first block)
    g_m: int  # BS dictionary columns

    def split(self, coeffs):
        """Separate ``(..., G_M + G_N)`` coefficients into BS and IRS parts."""
        coeffs = np.asarray(coeffs)
        return coeffs[..., : self.g_m], coeffs[..., self.g_m :]


def effective_dictionary(A_d: Dictionary, A_r: Dictionary) -> EffectiveDictionary:
    """Psi with ``h_eff = Psi @ h_effa``, i.e. ``blockdiag(conj(A_d), conj(A_r))``."""
    m, gm = A_d.matrix.shape
    n, gn = A_r.matrix.shape
    psi = np.zeros((m + n, gm + gn), dtype=complex)
    psi[:m, :gm] = A_d.matrix.conj()
    psi[m:, gm:] = A_r.matrix.conj()
    return EffectiveDictionary(psi, m, gm)


def reconstruct_spatial(coeffs, A) -> np.ndarray:
    """Spatial row ``coeffs^T A^H``; ``coeffs`` may be ``(G,)`` or ``(K, G)``."""
    mat = A.matrix if isinstance(A, Dictionary) else np.asarray(A)
    return np.asarray(coeffs) @ mat.conj().T
