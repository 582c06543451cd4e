"""Canonical phase-wavefront surfaces y' = f(x', z') and their steered pairing.

A beam type is defined by the surface connecting points of equal phase of
the emitted wave.  A planar surface produces an ordinary (Gaussian) beam,
a cone produces a Bessel beam; arbitrary user surfaces are supported for
other quasi-nondiffracting beams.  Steering never reshapes the surface:
a ``SteeredWavefront`` keeps the canonical surface and carries the frame
rotation, and all distance computations happen in the rotated frame where
the surface stays canonical.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .geometry import SteeringAngles, steering_rotation

PLANE = "plane"
CONE = "cone"
CUSTOM = "custom"


class ApexSingularity(ValueError):
    """Cone surface gradient requested at the apex, where it is undefined."""


@dataclass(frozen=True)
class Wavefront:
    """A canonical surface y' = f(x', z') with an analytic (or fallback) gradient.

    Use the :meth:`plane`, :meth:`cone` and :meth:`custom` constructors.
    ``h_over_r`` is the axicon slope of the cone surface (height over base
    radius); custom surfaces provide ``surface`` and optionally ``gradient``
    callables, both accepting numpy arrays and broadcasting over them.
    """

    kind: str
    h_over_r: float = 0.0
    surface: Callable | None = None
    gradient: Callable | None = None

    @classmethod
    def plane(cls) -> "Wavefront":
        """Flat surface y' = 0 (plane-wavefront beam)."""
        return cls(kind=PLANE)

    @classmethod
    def cone(cls, h_over_r: float = 0.2) -> "Wavefront":
        """Cone y' = (h/r) * sqrt(x'^2 + z'^2) opening along +y' (Bessel beam)."""
        if not h_over_r > 0:
            raise ValueError(f"h_over_r must be positive, got {h_over_r!r}")
        return cls(kind=CONE, h_over_r=float(h_over_r))

    @classmethod
    def custom(cls, surface: Callable, gradient: Callable | None = None) -> "Wavefront":
        """User surface f(x, z); gradient optional (finite differences otherwise).

        Both callables must be pure functions of (x, z) and accept numpy
        arrays.  ``gradient`` returns the pair (df/dx, df/dz).
        """
        return cls(kind=CUSTOM, surface=surface, gradient=gradient)


def surface_eval(w: Wavefront, x, z):
    """Surface height f(x, z) of the canonical wavefront."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    if w.kind == PLANE:
        out = np.zeros(np.broadcast(x, z).shape)
        return out if out.ndim else float(out)
    if w.kind == CONE:
        val = w.h_over_r * np.sqrt(x * x + z * z)
        return val if val.ndim else float(val)
    val = w.surface(x, z)
    return val if np.ndim(val) else float(val)


def surface_gradient(w: Wavefront, x, z):
    """(df/dx, df/dz) of the canonical surface.

    The cone is non-differentiable at its apex; requesting the gradient
    there raises :class:`ApexSingularity`.  Custom surfaces without an
    analytic gradient fall back to central finite differences with step
    1e-6 * max(1, ||(x, z)||).
    """
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    if w.kind == PLANE:
        shape = np.broadcast(x, z).shape
        gx, gz = np.zeros(shape), np.zeros(shape)
    elif w.kind == CONE:
        rho = np.sqrt(x * x + z * z)
        if np.any(rho == 0.0):
            raise ApexSingularity("cone gradient is undefined at the apex (0, 0)")
        gx = w.h_over_r * x / rho
        gz = w.h_over_r * z / rho
    elif w.gradient is not None:
        gx, gz = w.gradient(x, z)
        gx, gz = np.asarray(gx, dtype=float), np.asarray(gz, dtype=float)
    else:
        h = 1e-6 * np.maximum(1.0, np.sqrt(x * x + z * z))
        gx = (w.surface(x + h, z) - w.surface(x - h, z)) / (2.0 * h)
        gz = (w.surface(x, z + h) - w.surface(x, z - h)) / (2.0 * h)
        gx, gz = np.asarray(gx, dtype=float), np.asarray(gz, dtype=float)
    if np.ndim(gx):
        return gx, gz
    return float(gx), float(gz)


def tilted_plane_eval(angles: SteeringAngles, x, z):
    """Height of the steered plane wavefront expressed in the original frame.

    y0 = x * tan(az) + z * tan(el) / cos(az); equivalent to rotating the
    y' = 0 plane back into the original frame.
    """
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    val = x * np.tan(angles.azimuth) + z * np.tan(angles.elevation) / np.cos(angles.azimuth)
    return val if val.ndim else float(val)


@dataclass(frozen=True)
class SteeredWavefront:
    """A canonical wavefront paired with steering angles and the cached rotation."""

    base: Wavefront
    angles: SteeringAngles
    rotation: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "rotation", steering_rotation(self.angles))


def steer(base: Wavefront, angles: SteeringAngles) -> SteeredWavefront:
    return SteeredWavefront(base=base, angles=angles)
