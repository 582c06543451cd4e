"""Per-element phase synthesis: distances to the steered wavefront become
phase shifts and unit-magnitude excitation currents.

Element (i, j) of the centered rectangular array sits at
x = (i - (n_x-1)/2) * spacing, z = (j - (n_z-1)/2) * spacing, y = 0, and
elements are indexed row-major as n = i * n_z + j.  The excitation
I_n = exp(+j * phase_n) cancels the phase progression over the element's
distance to the wavefront, co-phasing all contributions on the surface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import kernels
from .solver import (
    NonConvergence,
    SolverConfig,
    SolverFailure,
    oracle_signed_min_distance,
    solve_foot,
)
from .wavefront import CONE, PLANE, ApexSingularity, SteeredWavefront

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ArrayGeometry:
    """Planar rectangular array in the xz-plane, centered on the origin."""

    n_x: int
    n_z: int
    spacing: float
    wavelength: float
    element_positions: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.n_x < 1 or self.n_z < 1:
            raise ValueError("element counts must be positive")
        if self.spacing <= 0 or self.wavelength <= 0:
            raise ValueError("spacing and wavelength must be positive")
        xs = (np.arange(self.n_x) - (self.n_x - 1) / 2.0) * self.spacing
        zs = (np.arange(self.n_z) - (self.n_z - 1) / 2.0) * self.spacing
        pos = np.zeros((self.n_x * self.n_z, 3))
        pos[:, 0] = np.repeat(xs, self.n_z)
        pos[:, 2] = np.tile(zs, self.n_x)
        pos.setflags(write=False)
        object.__setattr__(self, "element_positions", pos)

    @classmethod
    def half_wave(cls, n_x: int, n_z: int, wavelength: float) -> "ArrayGeometry":
        return cls(n_x=n_x, n_z=n_z, spacing=wavelength / 2.0, wavelength=wavelength)

    @property
    def num_elements(self) -> int:
        return self.n_x * self.n_z

    @property
    def aperture_sides(self) -> tuple[float, float]:
        """Physical footprint per axis, counting one spacing cell per element."""
        return self.n_x * self.spacing, self.n_z * self.spacing

    @property
    def aperture_radius(self) -> float:
        """Half the diagonal of the array footprint."""
        sx, sz = self.aperture_sides
        return 0.5 * math.hypot(sx, sz)


@dataclass(frozen=True)
class PhaseDistribution:
    """Signed wavefront distances and unwrapped phase shifts per element."""

    array: ArrayGeometry
    wavefront: SteeredWavefront
    signed_distances: np.ndarray
    phases: np.ndarray

    def phase_grid(self) -> np.ndarray:
        """Phases reshaped to (n_x, n_z)."""
        return self.phases.reshape(self.array.n_x, self.array.n_z)

    def distance_grid(self) -> np.ndarray:
        return self.signed_distances.reshape(self.array.n_x, self.array.n_z)


@dataclass(frozen=True)
class Excitation:
    """Unit-magnitude complex excitation currents, one per element."""

    currents: np.ndarray
    source: PhaseDistribution | None = None


def phase_shift(distance, wavelength: float):
    """Phase progression over ``distance`` at the given wavelength: 2*pi*d/lambda."""
    if wavelength <= 0:
        raise ValueError("wavelength must be positive")
    return TWO_PI * distance / wavelength


def synthesize(
    array: ArrayGeometry,
    w: SteeredWavefront,
    cfg: SolverConfig | None = None,
    method: str = "auto",
    backend: str | None = None,
) -> PhaseDistribution:
    """Solve every element's distance to the steered wavefront and phase it.

    ``method='auto'`` short-circuits plane wavefronts to the closed form and
    runs cone wavefronts through the batch Newton kernel; ``method='newton'``
    forces the numerical path for every beam kind.  Elements whose Newton
    starts all fail fall back to the brute-force oracle; only if that also
    fails does :class:`SolverFailure` propagate.
    """
    if method not in ("auto", "newton"):
        raise ValueError(f"method must be 'auto' or 'newton', got {method!r}")
    cfg = _with_array_defaults(cfg or SolverConfig(), array)
    kind = w.base.kind

    if kind == PLANE and method == "auto":
        x_a = array.element_positions[:, 0]
        z_a = array.element_positions[:, 2]
        dist = (
            x_a * math.cos(w.angles.elevation) * math.sin(w.angles.azimuth)
            + z_a * math.sin(w.angles.elevation)
        )
    elif kind in (PLANE, CONE):
        pe = array.element_positions @ w.rotation.T
        batch = kernels.nearest_feet(
            pe,
            kernels.KIND_PLANE if kind == PLANE else kernels.KIND_CONE,
            w.base.h_over_r,
            cfg.residual_tol,
            cfg.max_iterations,
            cfg.apex_guard,
            cfg.apex_perturb,
            backend=backend,
        )
        dist = batch.signed_distance.copy()
        for n in np.flatnonzero(~batch.converged):
            dist[n] = _fallback_distance(w, array.element_positions[n], cfg)
    else:
        dist = np.empty(array.num_elements)
        for n in range(array.num_elements):
            pos = array.element_positions[n]
            try:
                dist[n] = solve_foot(w, pos, cfg).signed_distance
            except (NonConvergence, ApexSingularity):
                dist[n] = _fallback_distance(w, pos, cfg)

    if not np.all(np.isfinite(dist)):
        raise SolverFailure("non-finite distance after Newton and oracle fallback")
    phases = phase_shift(dist, array.wavelength)
    return PhaseDistribution(
        array=array, wavefront=w, signed_distances=dist, phases=phases
    )


def _with_array_defaults(cfg: SolverConfig, array: ArrayGeometry) -> SolverConfig:
    """Fill search-box and apex-guard defaults from the array's footprint."""
    sx, sz = array.aperture_sides
    updates = {}
    if cfg.oracle_halfwidth is None:
        updates["oracle_halfwidth"] = 4.0 * max(sx, sz)
    if cfg.apex_guard is None:
        updates["apex_guard"] = 1e-3 * 2.0 * array.aperture_radius
    if cfg.apex_perturb is None:
        updates["apex_perturb"] = array.spacing
    if not updates:
        return cfg
    return replace(cfg, **updates)


def _fallback_distance(w: SteeredWavefront, pos: np.ndarray, cfg: SolverConfig) -> float:
    d = oracle_signed_min_distance(w, pos, cfg)
    if not math.isfinite(d):
        raise SolverFailure(f"oracle produced non-finite distance for element {pos}")
    return d


def to_excitation(pd: PhaseDistribution) -> Excitation:
    """I_n = exp(+j * phase_n); magnitudes are exactly one."""
    return Excitation(currents=np.exp(1j * pd.phases), source=pd)


def wrap_phase(pd: PhaseDistribution) -> PhaseDistribution:
    """Phases mapped into [0, 2*pi) for presentation; distances untouched."""
    return PhaseDistribution(
        array=pd.array,
        wavefront=pd.wavefront,
        signed_distances=pd.signed_distances,
        phases=np.mod(pd.phases, TWO_PI),
    )


def export_phase_csv(pd: PhaseDistribution, path: str | Path) -> None:
    """Write the per-element phase map, one row per element in index order."""
    wrapped = np.mod(pd.phases, TWO_PI)
    pos = pd.array.element_positions
    lines = ["x_m,z_m,phase_rad_wrapped,phase_rad_unwrapped,distance_m"]
    for n in range(pd.array.num_elements):
        lines.append(
            f"{pos[n, 0]:.17g},{pos[n, 2]:.17g},{wrapped[n]:.17g},"
            f"{pd.phases[n]:.17g},{pd.signed_distances[n]:.17g}"
        )
    Path(path).write_text("\n".join(lines) + "\n")
