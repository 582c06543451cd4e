"""Minimum signed distance from an antenna element to a steered wavefront.

The element is mapped into the steered frame, where the wavefront is its
canonical surface y = f(x, z), and the foot of the perpendicular is found
by Newton iteration on the two-variable system obtained by eliminating the
line parameter t:

    g1(x, z) = x - x_e + t * df/dx = 0
    g2(x, z) = z - z_e + t * df/dz = 0      with  t = f(x, z) - y_e.

The signed distance is t * ||(df/dx, -1, df/dz)|| at the foot: positive
when the element must advance its phase to reach the wavefront (element
below the surface), negative when it sits beyond it.  For the plane this
reduces to the classical far-field steering phase, sign included.

A brute-force squared-distance minimizer over a dense grid serves as the
independent oracle for every solve path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import SteeringAngles, to_primed
from .wavefront import (
    CONE,
    CUSTOM,
    PLANE,
    ApexSingularity,
    SteeredWavefront,
    Wavefront,
    surface_eval,
    surface_gradient,
)

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class NonConvergence(RuntimeError):
    """Newton iteration did not reach the residual tolerance."""


class SolverFailure(RuntimeError):
    """Both the Newton solve and the oracle fallback failed."""


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances and search-box parameters for the distance solvers.

    ``oracle_halfwidth`` defaults to four times the element's distance from
    the steered-frame origin (callers that know the array pass four times
    the aperture instead); ``apex_guard``/``apex_perturb`` keep cone Newton
    starts off the non-differentiable axis.
    """

    max_iterations: int = 50
    residual_tol: float = 1e-12
    oracle_grid: int = 2001
    oracle_halfwidth: float | None = None
    apex_guard: float | None = None
    apex_perturb: float | None = None

    def __post_init__(self) -> None:
        if self.max_iterations <= 0:
            raise ValueError("max_iterations must be positive")
        if self.residual_tol <= 0:
            raise ValueError("residual_tol must be positive")
        if self.oracle_grid < 3:
            raise ValueError("oracle_grid must be at least 3")
        for name in ("oracle_halfwidth", "apex_guard", "apex_perturb"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValueError(f"{name} must be positive when given")


@dataclass(frozen=True)
class FootSolution:
    """Converged foot of the perpendicular in the steered frame."""

    foot: np.ndarray
    t: float
    signed_distance: float
    iterations: int
    converged: bool


def _hessian(w: Wavefront, x: float, z: float) -> tuple[float, float, float]:
    """(fxx, fxz, fzz) of the canonical surface; finite differences for customs."""
    if w.kind == PLANE:
        return 0.0, 0.0, 0.0
    if w.kind == CONE:
        rho3 = (x * x + z * z) ** 1.5
        if rho3 == 0.0:
            raise ApexSingularity("cone curvature undefined at the apex")
        m = w.h_over_r
        return m * z * z / rho3, -m * x * z / rho3, m * x * x / rho3
    h = 1e-6 * max(1.0, math.hypot(x, z))
    gxp, gzp = surface_gradient(w, x + h, z)
    gxm, gzm = surface_gradient(w, x - h, z)
    fxx = (gxp - gxm) / (2.0 * h)
    fxz = (gzp - gzm) / (2.0 * h)
    _, gzp2 = surface_gradient(w, x, z + h)
    _, gzm2 = surface_gradient(w, x, z - h)
    fzz = (gzp2 - gzm2) / (2.0 * h)
    return fxx, fxz, fzz


def _newton_run(
    w: Wavefront,
    xe: float,
    ye: float,
    ze: float,
    x0: float,
    z0: float,
    cfg: SolverConfig,
) -> tuple[float, float, float, int, bool]:
    """Newton iteration from (x0, z0); returns (x, z, t, iterations, converged)."""
    x, z = x0, z0
    it = 0
    while True:
        if w.kind == CONE and x == 0.0 and z == 0.0:
            raise ApexSingularity("Newton iterate reached the cone apex")
        f = surface_eval(w, x, z)
        fx, fz = surface_gradient(w, x, z)
        t = f - ye
        g1 = x - xe + t * fx
        g2 = z - ze + t * fz
        if abs(g1) <= cfg.residual_tol and abs(g2) <= cfg.residual_tol:
            return x, z, t, it, True
        if it >= cfg.max_iterations:
            return x, z, t, it, False
        fxx, fxz, fzz = _hessian(w, x, z)
        j11 = 1.0 + fx * fx + t * fxx
        j12 = fx * fz + t * fxz
        j22 = 1.0 + fz * fz + t * fzz
        det = j11 * j22 - j12 * j12
        if det == 0.0 or not math.isfinite(det):
            return x, z, t, it, False
        x += (-g1 * j22 + g2 * j12) / det
        z += (-g2 * j11 + g1 * j12) / det
        it += 1


def _signed_distance_at(w: Wavefront, x: float, z: float, t: float) -> float:
    fx, fz = surface_gradient(w, x, z)
    return t * math.sqrt(1.0 + fx * fx + fz * fz)


def solve_foot(
    w: SteeredWavefront, element_pos: np.ndarray, cfg: SolverConfig | None = None
) -> FootSolution:
    """Nearest point on the steered wavefront from an element in the array plane.

    Raises :class:`NonConvergence` when no Newton start converges (callers
    fall back to :func:`oracle_min_distance`) and :class:`ApexSingularity`
    when an iterate lands exactly on the cone apex.
    """
    cfg = cfg or SolverConfig()
    base = w.base
    pe = to_primed(w.rotation, element_pos)
    xe, ye, ze = float(pe[0]), float(pe[1]), float(pe[2])

    x0, z0 = xe, ze
    if base.kind == CONE:
        guard = cfg.apex_guard if cfg.apex_guard is not None else 1e-12
        perturb = (
            cfg.apex_perturb
            if cfg.apex_perturb is not None
            else max(1e-6, 1e-3 * math.sqrt(xe * xe + ye * ye + ze * ze))
        )
        rho0 = math.hypot(x0, z0)
        if rho0 < guard:
            if rho0 > 0.0:
                x0 += perturb * x0 / rho0
                z0 += perturb * z0 / rho0
            else:
                x0 = perturb

    candidates: list[tuple[float, float, float, float, int]] = []
    total_it = 0
    apex_hit = None
    starts = [(x0, z0)]
    if base.kind == CONE:
        starts.append((-x0, -z0))
    for sx, sz in starts:
        try:
            x, z, t, it, ok = _newton_run(base, xe, ye, ze, sx, sz, cfg)
        except ApexSingularity as exc:
            apex_hit = exc
            continue
        total_it += it
        if ok:
            d = _signed_distance_at(base, x, z, t)
            candidates.append((abs(d), d, x, z, it))
    if base.kind == CONE:
        m = base.h_over_r
        rho_e = math.hypot(xe, ze)
        if rho_e + m * ye <= 0.0:
            d = math.sqrt(xe * xe + ye * ye + ze * ze)
            candidates.append((d, d, 0.0, 0.0, 0))

    if not candidates:
        if apex_hit is not None:
            raise apex_hit
        raise NonConvergence(
            f"no Newton start converged within {cfg.max_iterations} iterations "
            f"for element ({xe:.6g}, {ye:.6g}, {ze:.6g})"
        )
    _, d, x, z, _ = min(candidates, key=lambda c: c[0])
    foot = np.array([x, surface_eval(base, x, z), z])
    t = surface_eval(base, x, z) - ye
    return FootSolution(
        foot=foot, t=t, signed_distance=d, iterations=total_it, converged=True
    )


def _golden_min(fun, lo: float, hi: float, iterations: int = 80) -> float:
    """Golden-section argmin of a unimodal scalar function on [lo, hi]."""
    a, b = lo, hi
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = fun(x1), fun(x2)
    for _ in range(iterations):
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = fun(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = fun(x2)
    return x1 if f1 <= f2 else x2


def _oracle_search(
    w: SteeredWavefront, element_pos: np.ndarray, cfg: SolverConfig
) -> tuple[float, float, float]:
    """Grid-plus-golden-section minimum of the squared-distance field.

    Returns (unsigned distance, x*, z*) with the argmin in the steered frame.
    """
    base = w.base
    pe = to_primed(w.rotation, element_pos)
    xe, ye, ze = float(pe[0]), float(pe[1]), float(pe[2])

    hw = cfg.oracle_halfwidth
    if hw is None:
        hw = 4.0 * max(0.01, math.sqrt(xe * xe + ye * ye + ze * ze))
    n = cfg.oracle_grid
    xs = np.linspace(xe - hw, xe + hw, n)
    zs = np.linspace(ze - hw, ze + hw, n)

    fvals = surface_eval(base, xs[:, None], zs[None, :])
    fd = (xs[:, None] - xe) ** 2 + (fvals - ye) ** 2 + (zs[None, :] - ze) ** 2
    i, j = np.unravel_index(np.argmin(fd), fd.shape)
    best = float(fd[i, j])

    def fd_at(x: float, z: float) -> float:
        f = surface_eval(base, x, z)
        return (x - xe) ** 2 + (f - ye) ** 2 + (z - ze) ** 2

    x_star = float(xs[i])
    z_star = float(zs[j])
    x_lo, x_hi = xs[max(i - 1, 0)], xs[min(i + 1, n - 1)]
    x_star = _golden_min(lambda x: fd_at(x, z_star), float(x_lo), float(x_hi))
    z_lo, z_hi = zs[max(j - 1, 0)], zs[min(j + 1, n - 1)]
    z_star = _golden_min(lambda z: fd_at(x_star, z), float(z_lo), float(z_hi))
    refined = fd_at(x_star, z_star)
    if refined <= best:
        best = refined
    else:
        x_star, z_star = float(xs[i]), float(zs[j])
    return math.sqrt(best), x_star, z_star


def oracle_min_distance(
    w: SteeredWavefront, element_pos: np.ndarray, cfg: SolverConfig | None = None
) -> float:
    """Brute-force minimum distance: dense grid over the squared-distance field.

    Evaluates (x - x_e)^2 + (f(x, z) - y_e)^2 + (z - z_e)^2 on an
    ``oracle_grid``-squared lattice in the steered frame, then refines with
    one golden-section pass per axis around the best cell.  Unsigned; the
    grid stage alone is within one cell diagonal of the true minimum.
    """
    dist, _, _ = _oracle_search(w, element_pos, cfg or SolverConfig())
    return dist


def oracle_cell_diagonal(cfg: SolverConfig, halfwidth: float | None = None) -> float:
    """Worst-case gap between the oracle's grid stage and the true minimum."""
    if halfwidth is None:
        if cfg.oracle_halfwidth is None:
            raise ValueError("halfwidth required when the config leaves it unset")
        halfwidth = cfg.oracle_halfwidth
    cell = 2.0 * halfwidth / (cfg.oracle_grid - 1)
    return math.sqrt(2.0) * cell


def plane_distance_closed_form(angles: SteeringAngles, element_pos: np.ndarray) -> float:
    """Signed element-to-tilted-plane distance: x_a cos(el) sin(az) + z_a sin(el)."""
    x_a, z_a = float(element_pos[0]), float(element_pos[2])
    return x_a * math.cos(angles.elevation) * math.sin(angles.azimuth) + z_a * math.sin(
        angles.elevation
    )


def cone_distance_closed_form(h_over_r: float, element_primed: np.ndarray) -> float:
    """Signed distance to the canonical cone via the meridian-plane reduction.

    The cone is axisymmetric, so the problem collapses to the distance from
    (rho, y) to the ray y = (h/r) * rho, rho >= 0, with the apex taken as
    the nearest point when the perpendicular foot would fall at rho < 0.
    Sign matches :func:`solve_foot` (positive below the surface).
    """
    m = float(h_over_r)
    x, y, z = (float(v) for v in element_primed)
    rho = math.hypot(x, z)
    foot_rho = (rho + m * y) / (1.0 + m * m)
    if foot_rho < 0.0:
        return math.sqrt(rho * rho + y * y)
    return (m * rho - y) / math.sqrt(1.0 + m * m)


def oracle_signed_min_distance(
    w: SteeredWavefront, element_pos: np.ndarray, cfg: SolverConfig | None = None
) -> float:
    """Oracle-backed signed distance, used when Newton declines on a surface.

    The sign is read off the line parameter t = f(x*, z*) - y_e at the
    oracle's argmin, matching the :func:`solve_foot` convention.
    """
    cfg = cfg or SolverConfig()
    d, x_star, z_star = _oracle_search(w, element_pos, cfg)
    pe = to_primed(w.rotation, element_pos)
    t = surface_eval(w.base, x_star, z_star) - float(pe[1])
    return d if t >= 0.0 else -d
