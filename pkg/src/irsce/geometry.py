"""Uniform planar array geometry and steering vectors.

Element ordering is horizontal-major: element ``(mx, my)`` sits at flat
index ``mx * ny + my``. Every dictionary, channel matrix and precoder in the
package uses this ordering.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HALF_PI = np.pi / 2


@dataclass(frozen=True)
class AnglePair:
    """Horizontal (``theta``) and vertical (``phi``) angle in radians."""

    theta: float
    phi: float

    def __post_init__(self):
        for name in ("theta", "phi"):
            v = getattr(self, name)
            if not (-HALF_PI <= v < HALF_PI):
                raise ValueError(f"{name}={v!r} outside [-pi/2, pi/2)")


@dataclass(frozen=True)
class ArrayDims:
    nx: int
    ny: int

    def __post_init__(self):
        if int(self.nx) < 1 or int(self.ny) < 1:
            raise ValueError(f"array dims must be positive, got ({self.nx}, {self.ny})")

    @property
    def n(self) -> int:
        return self.nx * self.ny

    def __iter__(self):
        return iter((self.nx, self.ny))


def as_dims(dims) -> ArrayDims:
    if isinstance(dims, ArrayDims):
        return dims
    nx, ny = dims
    return ArrayDims(int(nx), int(ny))


def steering_matrix(dims, theta, phi) -> np.ndarray:
    """Steering vectors for many angle pairs at once, one per column.

    ``theta`` and ``phi`` are 1-D arrays of equal length P; the result has
    shape ``(nx*ny, P)``.
    """
    dims = as_dims(dims)
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    mx = np.arange(dims.nx)[:, None]
    my = np.arange(dims.ny)[:, None]
    horiz = np.exp(1j * np.pi * mx * np.sin(theta))
    vert = np.exp(1j * np.pi * my * np.cos(theta) * np.sin(phi))
    # column-wise Kronecker product, horizontal factor first
    a = (horiz[:, None, :] * vert[None, :, :]).reshape(dims.n, -1)
    return a / np.sqrt(dims.n)


def steering_vector(dims, angles: AnglePair) -> np.ndarray:
    """Unit-norm steering vector of a half-wavelength UPA."""
    return steering_matrix(dims, angles.theta, angles.phi)[:, 0]
