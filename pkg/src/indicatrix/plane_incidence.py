"""Raster approximation of incidence and neighbourhood measures in the plane.

Sets live on the unit torus [0, 1)^2 sampled at cell centres.  Row index i
is the y coordinate and column index j the x coordinate, so cell (i, j) has
centre ((j + 1/2) / R, (i + 1/2) / R).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy import ndimage

from .circle_set import InvalidInputError
from .constructions import FatCantorSpec, fat_cantor_complement


@dataclass(frozen=True, eq=False)
class RasterSet:
    resolution: int
    cells: np.ndarray

    def __post_init__(self):
        R = self.resolution
        if R < 16 or R & (R - 1):
            raise InvalidInputError("resolution must be a power of two >= 16")
        cells = np.asarray(self.cells, dtype=bool)
        if cells.shape != (R, R):
            raise InvalidInputError(f"cells must have shape ({R}, {R})")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)

    @property
    def cell_area(self) -> float:
        return 1.0 / self.resolution**2

    @property
    def area(self) -> float:
        return float(self.cells.sum()) * self.cell_area

    def shifted(self, di: int, dj: int) -> RasterSet:
        """Grid-aligned translate on the torus."""
        return RasterSet(self.resolution, np.roll(self.cells, (di, dj), axis=(0, 1)))


def _centres(resolution: int) -> tuple[np.ndarray, np.ndarray]:
    c = (np.arange(resolution) + 0.5) / resolution
    X, Y = np.meshgrid(c, c)
    return X, Y


def rasterize(pred: Callable, resolution: int) -> RasterSet:
    """Mark a cell iff its centre satisfies ``pred(x, y)``.

    ``pred`` may be vectorised over numpy arrays; scalar predicates are
    wrapped with ``np.vectorize``.
    """
    X, Y = _centres(resolution)
    try:
        mask = np.asarray(pred(X, Y), dtype=bool)
        if mask.shape != X.shape:
            raise ValueError
    except (TypeError, ValueError):
        mask = np.vectorize(lambda x, y: bool(pred(float(x), float(y))))(X, Y).astype(bool)
    return RasterSet(resolution, mask)


def disk(radius: float, resolution: int, centre=(0.5, 0.5)) -> RasterSet:
    cx, cy = centre
    return rasterize(lambda x, y: (x - cx) ** 2 + (y - cy) ** 2 < radius**2, resolution)


def square(side: float, resolution: int, centre=(0.5, 0.5)) -> RasterSet:
    cx, cy = centre
    half = side / 2
    return rasterize(lambda x, y: (np.abs(x - cx) < half) & (np.abs(y - cy) < half), resolution)


CANTOR_REFERENCE_RESOLUTION = 512


def cantor_product(lam, resolution: int, stage: int | None = None) -> RasterSet:
    """(Fat Cantor complement in x) times (0, 1) in y.

    By default the stage is the deepest one whose gaps are at least two
    cells wide at resolution 512, so every resolution from 512 up samples
    the same set.  Narrower gaps are hit or missed by centre sampling
    depending on alignment.
    """
    lam = Fraction(lam)
    if stage is None:
        ref = min(resolution, CANTOR_REFERENCE_RESOLUTION)
        stage = 1
        while lam ** (stage + 1) * ref >= 2:
            stage += 1
    E, _ = fat_cantor_complement(FatCantorSpec(lam, stage))
    xs = (np.arange(resolution) + 0.5) / resolution
    bounds = np.array([(float(a), float(b)) for a, b in E.pieces])
    inside = np.zeros(resolution, dtype=bool)
    for a, b in bounds:
        inside |= (xs > a) & (xs < b)
    return RasterSet(resolution, np.tile(inside, (resolution, 1)))


def shape_from_literal(text: str, resolution: int) -> RasterSet:
    """``disk:r``, ``square:side`` or ``cantor:lam[,stage]``."""
    kind, _, arg = text.partition(":")
    try:
        if kind == "disk":
            return disk(float(arg), resolution)
        if kind == "square":
            return square(float(arg), resolution)
        if kind == "cantor":
            parts = arg.split(",")
            stage = int(parts[1]) if len(parts) > 1 else None
            return cantor_product(Fraction(parts[0]), resolution, stage)
    except ValueError as exc:
        raise InvalidInputError(f"bad shape argument {arg!r}: {exc}") from None
    raise InvalidInputError(f"unknown shape {kind!r} (expected disk, square or cantor)")


# --- incidence and neighbourhoods -------------------------------------------


def cell_shift(h: float, v: Sequence[float], resolution: int) -> tuple[int, int]:
    """Nearest-cell rounding of the displacement h v, as (rows, cols)."""
    vx, vy = float(v[0]), float(v[1])
    norm = math.hypot(vx, vy)
    if norm == 0:
        raise InvalidInputError("direction must be nonzero")
    return round(h * vy / norm * resolution), round(h * vx / norm * resolution)


def disagreement_cells(E: RasterSet, h: float, v: Sequence[float] = (1.0, 0.0)) -> np.ndarray:
    """Cells x where exactly one of x, x + h v lies in E."""
    di, dj = cell_shift(h, v, E.resolution)
    moved = np.roll(E.cells, (-di, -dj), axis=(0, 1))
    return E.cells ^ moved


def tau_directional(E: RasterSet, h: float, v: Sequence[float] = (1.0, 0.0)) -> float:
    if h < 0:
        raise InvalidInputError("h must be >= 0")
    return float(disagreement_cells(E, h, v).sum()) * E.cell_area


def _torus_distance(mask: np.ndarray, pad: int) -> np.ndarray:
    """Euclidean distance (in cells, centre to centre) from each cell to the nearest False cell."""
    if mask.all():
        return np.full(mask.shape, np.inf)
    padded = np.pad(mask, pad, mode="wrap")
    dist = ndimage.distance_transform_edt(padded)
    # wrap neighbours farther than the pad are invisible, so distances above
    # the pad may be overestimated; callers only threshold below it
    return dist[pad:-pad, pad:-pad] if pad else dist


class NeighbourhoodCells(NamedTuple):
    kh: np.ndarray  # K(h) minus K
    gamma: np.ndarray  # Gamma(h)


def neighbourhood_cells(E: RasterSet, h: float) -> NeighbourhoodCells:
    """Cells of K(h) minus K and of Gamma(h), K the complement, Gamma the boundary.

    A cell centre at centre distance d from the nearest cell of the other
    set lies about d - 1/2 cells from the interface.
    """
    R = E.resolution
    reach = h * R
    pad = min(R, int(math.ceil(reach)) + 2)
    d_to_K = _torus_distance(E.cells, pad)
    d_to_E = _torus_distance(~E.cells, pad)
    kh = E.cells & (d_to_K - 0.5 <= reach)
    k_side = ~E.cells & (d_to_E - 0.5 <= reach)
    return NeighbourhoodCells(kh, kh | k_side)


def neighborhood_measures(E: RasterSet, h: float) -> tuple[float, float]:
    """(|K(h) minus K|, |Gamma(h)|) from grid distance transforms."""
    if h < 0:
        raise InvalidInputError("h must be >= 0")
    cells = neighbourhood_cells(E, h)
    return float(cells.kh.sum()) * E.cell_area, float(cells.gamma.sum()) * E.cell_area


def _dilate(mask: np.ndarray) -> np.ndarray:
    return ndimage.binary_dilation(np.pad(mask, 1, mode="wrap"), structure=np.ones((3, 3), bool))[1:-1, 1:-1]


class ChainCheck(NamedTuple):
    e_side_in_kh: bool  # {x in E : x + hv in K} within K(h) minus K
    kh_in_gamma: bool
    disagreement_in_gamma: bool
    disagreement_in_kh: bool  # the literal inclusion; fails on the K side
    tau: float
    kh: float
    gamma: float

    @property
    def holds(self) -> bool:
        return self.e_side_in_kh and self.kh_in_gamma and self.disagreement_in_gamma and self.tau <= 2 * self.kh + 1e-12


def inclusion_chain(E: RasterSet, h: float, v: Sequence[float] = (1.0, 0.0)) -> ChainCheck:
    """Cell-level inclusions with one cell of dilation slack."""
    dis = disagreement_cells(E, h, v)
    cells = neighbourhood_cells(E, h)
    kh_d = _dilate(cells.kh)
    gamma_d = _dilate(cells.gamma)
    a = E.cell_area
    return ChainCheck(
        e_side_in_kh=bool(np.all(kh_d[dis & E.cells])),
        kh_in_gamma=bool(np.all(gamma_d[cells.kh])),
        disagreement_in_gamma=bool(np.all(gamma_d[dis])),
        disagreement_in_kh=bool(np.all(kh_d[dis])),
        tau=float(dis.sum()) * a,
        kh=float(cells.kh.sum()) * a,
        gamma=float(cells.gamma.sum()) * a,
    )


class DimensionEstimate(NamedTuple):
    d_X: float
    d_B: float
    r2_X: float
    r2_B: float


def _loglog_slope(hs: np.ndarray, vals: np.ndarray) -> tuple[float, float]:
    if np.any(vals <= 0):
        raise InvalidInputError("neighbourhood measure vanished; h too small for this set")
    x, y = np.log(hs), np.log(vals)
    slope, icept = np.polyfit(x, y, 1)
    resid = y - (slope * x + icept)
    ss = float(np.sum((y - y.mean()) ** 2))
    return float(slope), (1.0 if ss == 0 else 1 - float(np.sum(resid**2)) / ss)


def dimension_estimates(E: RasterSet, h_list: Sequence[float]) -> DimensionEstimate:
    """d - (log-log slope) for |K(h) minus K| and |Gamma(h)|, d = 2."""
    hs = np.array(sorted({float(h) for h in h_list}, reverse=True))
    if len(hs) < 4:
        raise InvalidInputError("need at least 4 distinct h values")
    if hs[-1] < 2 / E.resolution:
        raise InvalidInputError(f"h below grid scale 2/{E.resolution}")
    meas = np.array([neighborhood_measures(E, h) for h in hs])
    sx, rx = _loglog_slope(hs, meas[:, 0])
    sb, rb = _loglog_slope(hs, meas[:, 1])
    return DimensionEstimate(2 - sx, 2 - sb, rx, rb)


DEFAULT_CELL_COUNTS = (2, 3, 4, 6, 8, 11, 16, 23, 32)


def default_h_list(resolution: int) -> list[float]:
    """h = k / R0 for roughly geometric whole cell counts k, R0 = min(R, 512).

    Whole cells at every resolution that is a multiple of R0 keep band
    widths free of rounding, so estimates at R and 2R see the same h.
    """
    base = min(resolution, CANTOR_REFERENCE_RESOLUTION)
    return [k / base for k in DEFAULT_CELL_COUNTS]


# --- PGM with JSON sidecar --------------------------------------------------


def write_pgm(E: RasterSet, path) -> Path:
    """Binary PGM (P5, maxval 1) plus ``<path>.json`` holding the resolution."""
    path = Path(path)
    R = E.resolution
    with open(path, "wb") as fh:
        fh.write(f"P5\n{R} {R}\n1\n".encode("ascii"))
        fh.write(E.cells.astype(np.uint8).tobytes())
    Path(str(path) + ".json").write_text(json.dumps({"resolution": R}) + "\n")
    return path


def read_pgm(path) -> RasterSet:
    path = Path(path)
    data = path.read_bytes()
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        start = pos
        while not data[pos : pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos].decode("ascii"))
    pos += 1
    magic, w, h, maxval = tokens
    if magic != "P5" or maxval != "1" or w != h:
        raise InvalidInputError(f"{path}: expected square P5 image with maxval 1")
    R = int(w)
    side = Path(str(path) + ".json")
    if side.exists() and json.loads(side.read_text()).get("resolution") != R:
        raise InvalidInputError(f"{side}: resolution does not match image")
    pixels = np.frombuffer(data[pos : pos + R * R], dtype=np.uint8)
    if pixels.size != R * R:
        raise InvalidInputError(f"{path}: truncated pixel data")
    return RasterSet(R, pixels.reshape(R, R) > 0)


# --- verification suite -----------------------------------------------------

STANDARD_SHAPES = ("disk:0.25", "square:0.5", "cantor:1/4")


def plane_reports(resolutions: Sequence[int] = (512, 1024), hs: Sequence[float] = (1 / 64, 1 / 16, 1 / 8)) -> list:
    """Inclusion chain and dimension checks for the standard shapes.

    ``chain`` reports check E-side disagreement in K(h) minus K, K(h) minus K
    in Gamma(h), all disagreement in Gamma(h) and tau <= 2 |K(h) minus K|.
    ``literal inclusion`` reports check every disagreement cell against
    K(h) minus K; cells of K whose translate lies in E break it.
    """
    from .bounds import BoundReport

    reports = []
    directions = ((1.0, 0.0), (0.6, 0.8))
    estimates: dict[str, list[DimensionEstimate]] = {}
    for shape in STANDARD_SHAPES:
        for R in resolutions:
            E = shape_from_literal(shape, R)
            checks = [(h, v, inclusion_chain(E, h, v)) for h in hs for v in directions]
            bad = [
                (h, v, c.e_side_in_kh, c.kh_in_gamma, c.disagreement_in_gamma, c.tau, c.kh, c.gamma)
                for h, v, c in checks
                if not c.holds
            ]
            reports.append(BoundReport(f"chain {shape} R={R}", quantity=len(bad), bound=0, witnesses=bad[:1]))
            # the unqualified inclusion of every disagreement cell in K(h) minus K
            literal = [(h, v, c.tau, c.kh) for h, v, c in checks if not c.disagreement_in_kh]
            reports.append(
                BoundReport(f"literal inclusion {shape} R={R}", quantity=len(literal), bound=0, witnesses=literal[:1])
            )
            est = dimension_estimates(E, default_h_list(R))
            estimates.setdefault(shape, []).append(est)
            reports.append(
                BoundReport(
                    f"dimension {shape} R={R}",
                    quantity=est.d_X,
                    bound=est.d_B + 0.05,
                    witnesses=[("d_X", est.d_X, "d_B", est.d_B)],
                )
            )
            if shape.startswith("cantor"):
                reports.append(
                    BoundReport(
                        f"cantor index R={R}",
                        quantity=abs(est.d_X - 1.5),
                        bound=0.1,
                        witnesses=[("d_X", est.d_X, "target", 1.5)],
                    )
                )
    for shape, ests in estimates.items():
        if len(ests) > 1:
            drift = max(
                max(abs(a.d_X - b.d_X), abs(a.d_B - b.d_B)) for a, b in zip(ests, ests[1:])
            )
            reports.append(BoundReport(f"grid convergence {shape}", quantity=drift, bound=0.1))
    return reports
