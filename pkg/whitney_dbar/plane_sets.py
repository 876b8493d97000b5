"""
Compact planar sets: self-similar Cantor sets, Koch-type snowflake curves,
finite-perimeter regions, and their delta-neighborhoods on a grid.
"""

from abc import ABC, abstractmethod
import json
import logging
import math
from pathlib import Path
from typing import Literal, Self

from matplotlib.path import Path as MplPath
import numpy as np
from pydantic import Field, ValidationError, field_validator, model_validator
from scipy.spatial import cKDTree

from .exceptions import BudgetExceededError, InvalidInputError
from .grid import Grid
from .schemas.base import ArrayBaseModel, readonly
from .schemas.sets import IfsSpec, SampleDocument
from .settings import get_settings


logger = logging.getLogger(__name__)


###################
### Set samples ###
###################


class SetSample(ArrayBaseModel):
    """
    Finite h-dense sample of a compact planar set.

    IFS samples carry one word per point (``cells``); curve samples carry the
    curve parameter per point (``params``).
    """

    kind: Literal["ifs", "snowflake", "circle", "grid", "points"] = "points"
    points: np.ndarray
    h: float = Field(ge=0)
    cells: tuple[str, ...] | None = None
    params: np.ndarray | None = None
    spec: IfsSpec | None = None
    depth: int | None = Field(default=None, ge=0)

    @field_validator("points", mode="before")
    @classmethod
    def _as_points(cls, v: object) -> np.ndarray:
        return readonly(np.atleast_1d(np.array(v, dtype=np.complex128)))

    @field_validator("params", mode="before")
    @classmethod
    def _as_params(cls, v: object) -> np.ndarray | None:
        return None if v is None else readonly(np.array(v, dtype=float))

    @model_validator(mode="after")
    def _check(self) -> Self:
        n = self.points.size
        if not np.all(np.isfinite(self.points)):
            raise ValueError("sample points must be finite")
        if np.unique(self.points).size != n:
            raise ValueError("sample points must be pairwise distinct")
        if self.cells is not None and len(self.cells) != n:
            raise ValueError("one cell word per point is required")
        if self.params is not None and self.params.shape != (n,):
            raise ValueError("one parameter per point is required")
        return self

    def __len__(self) -> int:
        return self.points.size

    def translated(self, shift: complex) -> Self:
        return self.model_copy(update={"points": readonly(self.points + shift)})

    def mirrored(self) -> Self:
        return self.model_copy(update={"points": readonly(np.conj(self.points))})

    def permuted(self, order: np.ndarray) -> Self:
        update: dict = {"points": readonly(self.points[order])}
        if self.cells is not None:
            update["cells"] = tuple(self.cells[i] for i in order)
        if self.params is not None:
            update["params"] = readonly(self.params[order])
        return self.model_copy(update=update)

    def subsample(self, count: int, seed: int) -> Self:
        """Fixed-seed subsample of ``count`` points, kept in original order."""
        rng = np.random.default_rng(seed)
        order = np.sort(rng.choice(len(self), size=count, replace=False))
        return self.permuted(order)

    def to_document(self) -> SampleDocument:
        metadata: dict = {"h": self.h, "depth": self.depth, "kind": self.kind}
        if self.spec is not None:
            metadata["spec"] = self.spec.model_dump(mode="json")
        if self.params is not None:
            metadata["params"] = self.params.tolist()
        return SampleDocument(
            kind="ifs" if self.kind == "ifs" else "points",
            points=[(float(z.real), float(z.imag)) for z in self.points],
            cells=list(self.cells or ()),
            metadata=metadata,
        )

    def to_json(self, indent: int | None = None) -> str:
        return self.to_document().model_dump_json(indent=indent)

    @classmethod
    def from_json(cls, text: str) -> Self:
        doc = SampleDocument.model_validate_json(text)
        meta = doc.metadata
        return cls(
            kind=meta.get("kind", "points"),
            points=[complex(x, y) for x, y in doc.points],
            h=meta.get("h", 0.0),
            cells=tuple(doc.cells) if doc.cells else None,
            params=meta.get("params"),
            spec=IfsSpec.model_validate(meta["spec"]) if meta.get("spec") else None,
            depth=meta.get("depth"),
        )


def load_set_spec(path: Path) -> SetSample:
    """SetSample from a JSON document written by ``SetSample.to_json``."""
    try:
        text = path.read_text()
    except OSError as e:
        raise InvalidInputError(f"Cannot read set spec '{path}': {e}") from e
    try:
        return SetSample.from_json(text)
    except ValidationError as e:
        raise InvalidInputError(f"Invalid set spec '{path}': {e}") from e


def as_xy(points: np.ndarray) -> np.ndarray:
    return np.column_stack([points.real, points.imag])


def _check_point_budget(count: int, budget: int | None) -> None:
    budget = budget or get_settings().point_budget
    if count > budget:
        raise BudgetExceededError(f"{count} points requested, point budget is {budget}")


def ifs_sample(spec: IfsSpec, depth: int, budget: int | None = None) -> SetSample:
    """
    One representative per depth-``depth`` cell: the image of ``spec.base``
    under each word of length ``depth``.
    """
    if depth < 0:
        raise InvalidInputError(f"depth must be >= 0, got {depth}")
    count = len(spec.maps) ** depth
    _check_point_budget(count, budget)

    points = np.array([spec.base], dtype=complex)
    words = [""]
    factors = np.array([m.factor for m in spec.maps])
    shifts = np.array([m.shift for m in spec.maps])
    for _ in range(depth):
        # the new letter is the outermost map
        points = (factors[:, None] * points[None, :] + shifts[:, None]).reshape(-1)
        words = [letter + w for letter in spec.alphabet for w in words]

    h = spec.cell_diameter(depth)
    logger.info("IFS '%s' sampled at depth %d: %d points, h=%.3e", spec.name, depth, count, h)
    return SetSample(
        kind="ifs",
        points=points,
        h=h,
        cells=tuple(words),
        spec=spec,
        depth=depth,
    )


def circle_sample(n: int, radius: float = 1.0, center: complex = 0j) -> SetSample:
    if n < 2:
        raise InvalidInputError("a circle sample needs at least 2 points")
    t = np.arange(n) / n
    points = center + radius * np.exp(2j * np.pi * t)
    return SetSample(kind="circle", points=points, h=math.pi * radius / n, params=t)


def grid_sample(n: int, spacing: float, corner: complex = 0j) -> SetSample:
    """n x n lattice with the given spacing; dense in the square it spans."""
    if n < 1:
        raise InvalidInputError("a grid sample needs n >= 1")
    ticks = np.arange(n) * spacing
    xx, yy = np.meshgrid(ticks, ticks)
    points = (corner + xx + 1j * yy).reshape(-1)
    return SetSample(kind="grid", points=points, h=spacing / math.sqrt(2.0))


########################
### Snowflake curves ###
########################


class SnowflakeCurve(ArrayBaseModel):
    """
    Koch-type curve from 0 to 1 with generator angle ``beta``: each segment is
    replaced by four of relative length ratio = 1 / (2 (1 + cos beta)).
    """

    beta: float = Field(gt=0, lt=math.pi / 2)
    depth: int = Field(ge=0)
    params: np.ndarray
    points: np.ndarray

    @field_validator("params", "points", mode="before")
    @classmethod
    def _readonly(cls, v: object) -> np.ndarray:
        return readonly(np.array(v))

    @property
    def ratio(self) -> float:
        return 1.0 / (2.0 * (1.0 + math.cos(self.beta)))

    @property
    def alpha(self) -> float:
        """Hölder exponent of the parametrization."""
        return math.log(1.0 / self.ratio) / math.log(4.0)

    @property
    def samples(self) -> list[tuple[float, complex]]:
        return list(zip(self.params.tolist(), self.points.tolist(), strict=True))

    def to_sample(self) -> SetSample:
        return SetSample(
            kind="snowflake",
            points=self.points,
            h=self.ratio**self.depth,
            params=self.params,
            depth=self.depth,
        )

    def ratio_bounds(self, chunk: int = 1024) -> tuple[float, float]:
        """min and max of |z(t) - z(s)| / |t - s|^alpha over all sampled pairs."""
        lo, hi = math.inf, 0.0
        n = self.points.size
        for start in range(0, n, chunk):
            rows = slice(start, min(start + chunk, n))
            dz = np.abs(self.points[rows, None] - self.points[None, :])
            dt = np.abs(self.params[rows, None] - self.params[None, :])
            keep = dt > 0
            ratio = dz[keep] / dt[keep] ** self.alpha
            if ratio.size:
                lo = min(lo, float(ratio.min()))
                hi = max(hi, float(ratio.max()))
        return lo, hi


def snowflake_sample(beta: float, depth: int, budget: int | None = None) -> SnowflakeCurve:
    if not 0 < beta < math.pi / 2:
        raise InvalidInputError(f"beta must lie in (0, pi/2), got {beta}")
    if depth < 0:
        raise InvalidInputError(f"depth must be >= 0, got {depth}")
    _check_point_budget(4**depth + 1, budget)

    rho = 1.0 / (2.0 * (1.0 + math.cos(beta)))
    apex = rho + rho * complex(math.cos(beta), math.sin(beta))
    maps = (
        (rho, 0j),
        (rho * complex(math.cos(beta), math.sin(beta)), rho),
        (rho * complex(math.cos(beta), -math.sin(beta)), apex),
        (rho, 1.0 - rho),
    )
    points = np.array([0j, 1 + 0j])
    for _ in range(depth):
        pieces = [factor * points + shift for factor, shift in maps]
        points = np.concatenate([pieces[0]] + [p[1:] for p in pieces[1:]])
    # pin the endpoints against rounding drift
    points[0], points[-1] = 0j, 1 + 0j
    params = np.arange(points.size) / 4**depth
    logger.info("Snowflake beta=%.4f sampled at depth %d: %d points", beta, depth, points.size)
    return SnowflakeCurve(beta=beta, depth=depth, params=params, points=points)


def box_counting_dimension(points: np.ndarray, scales: list[float]) -> float:
    """Slope of log N(eps) against log(1/eps), N = occupied boxes of side eps."""
    if len(scales) < 2:
        raise InvalidInputError("box counting needs at least two scales")
    xy = as_xy(np.asarray(points, dtype=complex))
    xy = xy - xy.min(axis=0)
    counts = []
    for eps in scales:
        boxes = np.floor(xy / eps).astype(np.int64)
        counts.append(np.unique(boxes, axis=0).shape[0])
    slope, _ = np.polyfit(np.log(1.0 / np.asarray(scales)), np.log(counts), 1)
    return float(slope)


###########################
### Delta neighborhoods ###
###########################


class DeltaMask(ArrayBaseModel):
    delta: float
    mask: np.ndarray
    area: float
    under_resolved: bool = False


def delta_mask(
    sample: SetSample,
    delta: float,
    grid: Grid,
    workers: int = 1,
) -> DeltaMask:
    """Nodes of ``grid`` within ``delta`` of some sample point."""
    if delta <= 0:
        raise InvalidInputError(f"delta must be positive, got {delta}")
    if not grid.contains(sample.points, pad=delta):
        raise InvalidInputError("grid does not cover the sample padded by delta")
    grid.check_budget()

    tree = cKDTree(as_xy(sample.points))
    nodes = as_xy(grid.nodes().reshape(-1))
    dist, _ = tree.query(nodes, k=1, distance_upper_bound=delta, workers=workers)
    mask = readonly((dist <= delta).reshape(grid.shape))
    area = float(np.count_nonzero(mask)) * grid.h**2

    under_resolved = delta < sample.h
    if under_resolved:
        logger.warning(
            "delta=%.3e is below the sample resolution h=%.3e; neighborhood under-resolved",
            delta,
            sample.h,
        )
    return DeltaMask(delta=delta, mask=mask, area=area, under_resolved=under_resolved)


###############
### Regions ###
###############


class Region(ArrayBaseModel):
    """
    Finite-perimeter region bounded by positively oriented closed polylines
    (vertex arrays, last vertex not repeated) and circles (center, radius).
    """

    polygons: tuple[np.ndarray, ...] = ()
    circles: tuple[tuple[complex, float], ...] = ()
    area: float = Field(gt=0)
    perimeter: float = Field(gt=0)

    @field_validator("polygons", mode="before")
    @classmethod
    def _as_vertices(cls, v: list) -> tuple[np.ndarray, ...]:
        return tuple(readonly(np.array(p, dtype=np.complex128)) for p in v)

    @model_validator(mode="after")
    def _check_area(self) -> Self:
        if not self.polygons and not self.circles:
            raise ValueError("a region needs at least one boundary curve")
        signed = sum(shoelace(p) for p in self.polygons) + sum(
            math.pi * r**2 for _, r in self.circles
        )
        if abs(signed - self.area) > 1e-9 * abs(self.area):
            raise ValueError(f"boundary encloses area {signed}, stored {self.area}")
        return self

    def contains(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=complex)
        flat = points.reshape(-1)
        inside = np.zeros(flat.shape, dtype=bool)
        for vertices in self.polygons:
            path = MplPath(as_xy(vertices), closed=False)
            inside |= path.contains_points(as_xy(flat))
        for center, radius in self.circles:
            inside |= np.abs(flat - center) < radius
        return inside.reshape(points.shape)

    def bounds(self) -> tuple[complex, complex]:
        """Lower-left and upper-right corners of the bounding box."""
        lows, highs = [], []
        for vertices in self.polygons:
            lows.append(complex(vertices.real.min(), vertices.imag.min()))
            highs.append(complex(vertices.real.max(), vertices.imag.max()))
        for center, radius in self.circles:
            lows.append(center - radius * (1 + 1j))
            highs.append(center + radius * (1 + 1j))
        return (
            complex(min(z.real for z in lows), min(z.imag for z in lows)),
            complex(max(z.real for z in highs), max(z.imag for z in highs)),
        )

    def curves(self) -> list["BoundaryCurve"]:
        out: list[BoundaryCurve] = [PolygonCurve(vertices=v) for v in self.polygons]
        out.extend(CircleCurve(center=c, radius=r) for c, r in self.circles)
        return out

    def contour_rule(self, h: float, order: int = 8) -> tuple[np.ndarray, np.ndarray]:
        """
        Composite Gauss-Legendre rule for contour integrals over the boundary.

        Returns nodes z_k and complex weights w_k with sum u(z_k) w_k ≈ ∮ u dz,
        using ``order`` nodes per piece and pieces no longer than ``h``.
        """
        nodes, weights = zip(*(c.rule(h, order) for c in self.curves()), strict=True)
        return np.concatenate(nodes), np.concatenate(weights)

    def to_json(self) -> str:
        doc = SampleDocument(
            kind="region",
            metadata={
                "polygons": [[[z.real, z.imag] for z in p] for p in self.polygons],
                "circles": [[c.real, c.imag, r] for c, r in self.circles],
                "area": self.area,
                "perimeter": self.perimeter,
            },
        )
        return doc.model_dump_json()

    @classmethod
    def from_json(cls, text: str) -> Self:
        meta = json.loads(text)["metadata"]
        return cls(
            polygons=tuple(np.array([complex(x, y) for x, y in p]) for p in meta["polygons"]),
            circles=tuple((complex(x, y), r) for x, y, r in meta["circles"]),
            area=meta["area"],
            perimeter=meta["perimeter"],
        )


class BoundaryCurve(ArrayBaseModel, ABC):
    """Closed curve parametrized by t in [0, 1)."""

    @abstractmethod
    def __call__(self, t: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def pieces(self, h: float) -> np.ndarray:
        """Parameter breakpoints with pieces of length <= h."""

    @abstractmethod
    def velocity(self, t: np.ndarray) -> np.ndarray: ...

    def rule(self, h: float, order: int) -> tuple[np.ndarray, np.ndarray]:
        gl_nodes, gl_weights = np.polynomial.legendre.leggauss(order)
        breaks = self.pieces(h)
        left, right = breaks[:-1, None], breaks[1:, None]
        half = 0.5 * (right - left)
        t = (left + right) / 2 + half * gl_nodes[None, :]
        w = half * gl_weights[None, :]
        t, w = t.reshape(-1), w.reshape(-1)
        return self(t), w * self.velocity(t)


class CircleCurve(BoundaryCurve):
    center: complex
    radius: float

    def __call__(self, t: np.ndarray) -> np.ndarray:
        return self.center + self.radius * np.exp(2j * np.pi * np.asarray(t))

    def velocity(self, t: np.ndarray) -> np.ndarray:
        return 2j * np.pi * self.radius * np.exp(2j * np.pi * np.asarray(t))

    def pieces(self, h: float) -> np.ndarray:
        count = max(8, math.ceil(2 * math.pi * self.radius / h))
        return np.linspace(0.0, 1.0, count + 1)


class PolygonCurve(BoundaryCurve):
    vertices: np.ndarray

    def _closed(self) -> np.ndarray:
        return np.append(self.vertices, self.vertices[0])

    def __call__(self, t: np.ndarray) -> np.ndarray:
        t = np.mod(np.asarray(t, dtype=float), 1.0)
        m = self.vertices.size
        closed = self._closed()
        s = t * m
        k = np.minimum(np.floor(s).astype(int), m - 1)
        frac = s - k
        return closed[k] + frac * (closed[k + 1] - closed[k])

    def velocity(self, t: np.ndarray) -> np.ndarray:
        t = np.mod(np.asarray(t, dtype=float), 1.0)
        m = self.vertices.size
        closed = self._closed()
        k = np.minimum(np.floor(t * m).astype(int), m - 1)
        return m * (closed[k + 1] - closed[k])

    def pieces(self, h: float) -> np.ndarray:
        m = self.vertices.size
        closed = self._closed()
        breaks = [np.zeros(1)]
        for k in range(m):
            count = max(1, math.ceil(abs(closed[k + 1] - closed[k]) / h))
            breaks.append((k + np.arange(1, count + 1) / count) / m)
        return np.concatenate(breaks)


def shoelace(vertices: np.ndarray) -> float:
    closed = np.append(vertices, vertices[0])
    return 0.5 * float(np.sum(np.imag(np.conj(closed[:-1]) * closed[1:])))


def _segments_cross(p1: complex, p2: complex, q1: complex, q2: complex) -> bool:
    def orient(a: complex, b: complex, c: complex) -> float:
        return ((b - a).conjugate() * (c - a)).imag

    d1, d2 = orient(q1, q2, p1), orient(q1, q2, p2)
    d3, d4 = orient(p1, p2, q1), orient(p1, p2, q2)
    if ((d1 > 0 > d2) or (d1 < 0 < d2)) and ((d3 > 0 > d4) or (d3 < 0 < d4)):
        return True

    def on_segment(a: complex, b: complex, c: complex, d: float) -> bool:
        return d == 0 and min(a.real, b.real) <= c.real <= max(a.real, b.real) and min(
            a.imag, b.imag
        ) <= c.imag <= max(a.imag, b.imag)

    return (
        on_segment(q1, q2, p1, d1)
        or on_segment(q1, q2, p2, d2)
        or on_segment(p1, p2, q1, d3)
        or on_segment(p1, p2, q2, d4)
    )


def is_simple_polygon(vertices: np.ndarray) -> bool:
    m = len(vertices)
    if m < 3 or np.unique(vertices).size != m:
        return False
    edges = [(complex(vertices[k]), complex(vertices[(k + 1) % m])) for k in range(m)]
    for a in range(m):
        for b in range(a + 1, m):
            if b == a + 1 or (a == 0 and b == m - 1):
                continue
            if _segments_cross(*edges[a], *edges[b]):
                return False
    return True


def region_make(
    kind: Literal["disk", "square", "polygon"],
    *,
    center: complex = 0j,
    radius: float = 1.0,
    corner: complex = 0j,
    side: float = 1.0,
    vertices: list[complex] | np.ndarray | None = None,
) -> Region:
    if kind == "disk":
        if radius <= 0:
            raise InvalidInputError(f"radius must be positive, got {radius}")
        return Region(
            circles=((complex(center), float(radius)),),
            area=math.pi * radius**2,
            perimeter=2 * math.pi * radius,
        )
    if kind == "square":
        if side <= 0:
            raise InvalidInputError(f"side must be positive, got {side}")
        vertices = [corner, corner + side, corner + side * (1 + 1j), corner + 1j * side]
    elif kind != "polygon":
        raise InvalidInputError(f"Unknown region kind {kind!r}")
    if vertices is None:
        raise InvalidInputError("polygon regions need vertices")

    poly = np.asarray(vertices, dtype=complex)
    if not is_simple_polygon(poly):
        raise InvalidInputError("polygon is degenerate or self-intersecting")
    area = shoelace(poly)
    if area == 0:
        raise InvalidInputError("polygon encloses no area")
    if area < 0:
        poly = poly[::-1]
        area = -area
    perimeter = float(np.sum(np.abs(np.diff(np.append(poly, poly[0])))))
    return Region(polygons=(poly,), area=area, perimeter=perimeter)
