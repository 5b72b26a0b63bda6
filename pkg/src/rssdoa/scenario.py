"""Transmitter/sensor geometry, random placements and scenario files.

A scenario is one transmitter (the primary user, PU) and ``N`` sensors, each
carrying a uniform linear array with an absolute orientation. Angles are in
radians, distances in meters.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .errors import DegenerateGeometryError


def wrap_angle(a):
    """Wrap angles to ``[-pi, pi)``."""
    return (np.asarray(a, dtype=float) + np.pi) % (2.0 * np.pi) - np.pi


class Point2(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class SensorNode:
    position: Point2
    array_orientation: float


def _frozen(a, shape=None):
    arr = np.array(a, dtype=float)
    if shape is not None:
        arr = arr.reshape(shape)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Scenario:
    """PU position plus per-sensor positions and absolute array orientations.

    Parameters
    ----------
    pu : array_like, shape (2,)
    positions : array_like, shape (N, 2)
    orientations : array_like, shape (N,)
        Absolute ULA orientations; wrapped to ``[-pi, pi)`` on construction.
    """

    pu: np.ndarray
    positions: np.ndarray
    orientations: np.ndarray

    def __post_init__(self):
        pu = _frozen(self.pu, (2,))
        pos = _frozen(self.positions)
        if pos.ndim != 2 or pos.shape[1] != 2 or pos.shape[0] < 1:
            raise ValueError("positions must have shape (N, 2) with N >= 1")
        orient = np.array(self.orientations, dtype=float).reshape(-1)
        if orient.shape[0] != pos.shape[0]:
            raise ValueError("one orientation per sensor is required")
        if not (np.all(np.isfinite(pu)) and np.all(np.isfinite(pos))
                and np.all(np.isfinite(orient))):
            raise ValueError("scenario coordinates must be finite")
        d = np.hypot(pu[0] - pos[:, 0], pu[1] - pos[:, 1])
        if np.any(d <= 0.0):
            bad = int(np.flatnonzero(d <= 0.0)[0])
            raise DegenerateGeometryError(f"sensor {bad} coincides with the PU")
        object.__setattr__(self, "pu", pu)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "orientations", _frozen(wrap_angle(orient)))

    @classmethod
    def from_nodes(cls, pu, sensors: Iterable[SensorNode]) -> "Scenario":
        sensors = list(sensors)
        return cls(
            pu=np.asarray(pu, dtype=float),
            positions=[tuple(s.position) for s in sensors],
            orientations=[s.array_orientation for s in sensors],
        )

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    @property
    def sensors(self) -> list[SensorNode]:
        return [
            SensorNode(Point2(float(x), float(y)), float(o))
            for (x, y), o in zip(self.positions, self.orientations)
        ]

    def subset(self, idx) -> "Scenario":
        idx = np.atleast_1d(idx)
        return Scenario(self.pu, self.positions[idx], self.orientations[idx])


@dataclass(frozen=True, eq=False)
class GeometryCache:
    """Per-sensor distances and bearings derived from a :class:`Scenario`.

    ``dx``/``dy`` are PU minus sensor coordinates, ``theta`` is the bearing
    from sensor to PU and ``theta_tilde`` the bearing relative to the array
    orientation, both in ``[-pi, pi)``.
    """

    d: np.ndarray
    dx: np.ndarray
    dy: np.ndarray
    theta: np.ndarray
    theta_tilde: np.ndarray


def compute_geometry(scenario: Scenario) -> GeometryCache:
    dx = scenario.pu[0] - scenario.positions[:, 0]
    dy = scenario.pu[1] - scenario.positions[:, 1]
    d = np.hypot(dx, dy)
    if np.any(d <= 0.0):
        raise DegenerateGeometryError("sensor coincides with the PU")
    theta = wrap_angle(np.arctan2(dy, dx))
    return GeometryCache(
        d=_frozen(d),
        dx=_frozen(dx),
        dy=_frozen(dy),
        theta=_frozen(theta),
        theta_tilde=_frozen(wrap_angle(theta - scenario.orientations)),
    )


@dataclass(frozen=True)
class PlacementDistribution:
    """Uniform placement on the annulus ``R0 <= r <= R`` around the PU.

    ``theta_t`` is the half-width of the uniform array orientation error.
    """

    radius: float = 150.0
    guard_radius: float = 5.0
    theta_t: float = np.pi / 3

    def __post_init__(self):
        if not (0.0 < self.guard_radius < self.radius):
            raise ValueError("placement requires 0 < R0 < R")
        if not (0.0 <= self.theta_t < np.pi / 2):
            raise ValueError("orientation error half-width must lie in [0, pi/2)")


def sample_uniform_placement(dist: PlacementDistribution, n: int,
                             rng: np.random.Generator) -> Scenario:
    """Draw ``n`` sensors uniformly on the annulus with the PU at the origin."""
    if n < 1:
        raise ValueError("n must be >= 1")
    R, R0 = dist.radius, dist.guard_radius
    phi = rng.uniform(0.0, 2.0 * np.pi, n)
    u = rng.uniform(0.0, 1.0, n)
    r = np.sqrt(R0 * R0 + u * (R * R - R0 * R0))
    tilde = rng.uniform(-dist.theta_t, dist.theta_t, n)
    positions = np.column_stack((r * np.cos(phi), r * np.sin(phi)))
    bearing = phi + np.pi  # sensor -> PU
    return Scenario(np.zeros(2), positions, wrap_angle(bearing - tilde))


# -- scenario files ---------------------------------------------------------

class ScenarioParseError(ValueError):
    def __init__(self, lineno, detail):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {detail}")


def parse_scenario(text: str) -> Scenario:
    """Parse the ``pu x y`` / ``cr x y orientation`` record format."""
    pu = None
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        try:
            vals = [float(t) for t in tok[1:]]
        except ValueError:
            raise ScenarioParseError(lineno, f"non-numeric field in {raw.strip()!r}")
        if tok[0] == "pu":
            if pu is not None:
                raise ScenarioParseError(lineno, "duplicate pu record")
            if len(vals) != 2:
                raise ScenarioParseError(lineno, "expected 'pu <x> <y>'")
            pu = vals
        elif tok[0] == "cr":
            if len(vals) != 3:
                raise ScenarioParseError(lineno, "expected 'cr <x> <y> <orientation_rad>'")
            rows.append(vals)
        else:
            raise ScenarioParseError(lineno, f"unknown record type {tok[0]!r}")
    if pu is None:
        raise ScenarioParseError(0, "missing pu record")
    if not rows:
        raise ScenarioParseError(0, "no cr records")
    rows = np.asarray(rows)
    return Scenario(pu, rows[:, :2], rows[:, 2])


def read_scenario(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read())


def format_scenario(scenario: Scenario) -> str:
    lines = [f"pu {float(scenario.pu[0])!r} {float(scenario.pu[1])!r}"]
    for (x, y), o in zip(scenario.positions, scenario.orientations):
        lines.append(f"cr {float(x)!r} {float(y)!r} {float(o)!r}")
    return "\n".join(lines) + "\n"


def write_scenario(path, scenario: Scenario) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_scenario(scenario))
