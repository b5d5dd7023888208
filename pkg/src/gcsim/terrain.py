"""Gridded terrain height field with bilinear ground-height queries.

The grid is georeferenced through its own local ENU frame anchored at the
southwest corner, so queries never need a global projection. Heights are
ellipsoidal meters. Row 0 of the stored grid (and of the ASCII file) is the
northernmost row.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from .geodesy import GeodeticPosition, GeoReference, geodetic_to_enu

_EDGE_TOL_M = 1e-6


class TerrainOutOfBoundsError(ValueError):
    """A height query fell outside the grid footprint."""


class GridParseError(ValueError):
    """Malformed ASCII grid input."""

    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class HeightField:
    """Row-major rectangular grid of ground heights (row 0 = northernmost)."""

    origin: GeodeticPosition  # southwest corner; its altitude field is unused
    cell_size_m: float
    n_cols: int
    n_rows: int
    heights: tuple[tuple[float, ...], ...]
    _ref: GeoReference = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.n_cols < 2 or self.n_rows < 2:
            raise ValueError("grid needs at least 2 columns and 2 rows")
        if not (self.cell_size_m > 0.0 and math.isfinite(self.cell_size_m)):
            raise ValueError("cell size must be positive")
        if len(self.heights) != self.n_rows or any(len(r) != self.n_cols for r in self.heights):
            raise ValueError("height grid shape does not match ncols/nrows")
        for row in self.heights:
            if not all(map(math.isfinite, row)):
                raise ValueError("all heights must be finite")
        anchor = GeodeticPosition(self.origin.latitude_deg, self.origin.longitude_deg, 0.0)
        object.__setattr__(self, "_ref", GeoReference(anchor))

    @property
    def width_m(self) -> float:
        return (self.n_cols - 1) * self.cell_size_m

    @property
    def depth_m(self) -> float:
        return (self.n_rows - 1) * self.cell_size_m

    def node(self, col: int, row_from_south: int) -> float:
        return self.heights[self.n_rows - 1 - row_from_south][col]

    def min_height(self) -> float:
        return min(min(row) for row in self.heights)

    def max_height(self) -> float:
        return max(max(row) for row in self.heights)

    def local_xy(self, p: GeodeticPosition) -> tuple[float, float]:
        """Project a position onto the grid plane: meters east/north of the SW corner."""
        flat = GeodeticPosition(p.latitude_deg, p.longitude_deg, 0.0)
        enu = geodetic_to_enu(flat, self._ref)
        return enu.east_m, enu.north_m

    def contains(self, p: GeodeticPosition) -> bool:
        x, y = self.local_xy(p)
        return (-_EDGE_TOL_M <= x <= self.width_m + _EDGE_TOL_M
                and -_EDGE_TOL_M <= y <= self.depth_m + _EDGE_TOL_M)


def height_at(field: HeightField, p: GeodeticPosition) -> float:
    """Bilinearly interpolated ground height at ``p``.

    Raises :class:`TerrainOutOfBoundsError` when ``p`` projects outside the
    footprint; the grid never extrapolates.
    """
    x, y = field.local_xy(p)
    if not (-_EDGE_TOL_M <= x <= field.width_m + _EDGE_TOL_M
            and -_EDGE_TOL_M <= y <= field.depth_m + _EDGE_TOL_M):
        raise TerrainOutOfBoundsError(
            f"query at ({x:.3f}, {y:.3f}) m outside footprint "
            f"{field.width_m:.3f} x {field.depth_m:.3f} m")
    gx = min(max(x / field.cell_size_m, 0.0), field.n_cols - 1.0)
    gy = min(max(y / field.cell_size_m, 0.0), field.n_rows - 1.0)
    i = min(int(gx), field.n_cols - 2)
    j = min(int(gy), field.n_rows - 2)
    fx = gx - i
    fy = gy - j
    h00 = field.node(i, j)
    h10 = field.node(i + 1, j)
    h01 = field.node(i, j + 1)
    h11 = field.node(i + 1, j + 1)
    return (h00 * (1 - fx) * (1 - fy) + h10 * fx * (1 - fy)
            + h01 * (1 - fx) * fy + h11 * fx * fy)


_HEADER_KEYS = ("ncols", "nrows", "origin_lat", "origin_lon", "cellsize_m")


def load_ascii_grid(text: str) -> HeightField:
    """Parse the ASCII grid format (5 header lines, then nrows rows of ncols heights)."""
    lines = text.splitlines()
    header: dict[str, float] = {}
    for idx, key in enumerate(_HEADER_KEYS):
        if idx >= len(lines):
            raise GridParseError(f"missing header line '{key}'", idx + 1)
        parts = lines[idx].split()
        if len(parts) != 2 or parts[0] != key:
            raise GridParseError(f"expected '{key} <value>'", idx + 1)
        try:
            header[key] = float(parts[1])
        except ValueError:
            col = lines[idx].index(parts[1]) + 1
            raise GridParseError(f"non-numeric value for '{key}': {parts[1]!r}",
                                 idx + 1, col) from None
    n_cols = int(header["ncols"])
    n_rows = int(header["nrows"])
    if n_cols != header["ncols"] or n_rows != header["nrows"]:
        raise GridParseError("ncols/nrows must be integers", 1)
    if n_cols < 2 or n_rows < 2:
        raise GridParseError("grid needs at least 2 columns and 2 rows", 1)

    rows: list[tuple[float, ...]] = []
    for line_no in range(len(_HEADER_KEYS), len(lines)):
        line = lines[line_no]
        if not line.strip():
            continue
        if len(rows) == n_rows:
            raise GridParseError(f"unexpected data after row {n_rows}", line_no + 1)
        values: list[float] = []
        for m in re.finditer(r"\S+", line):
            try:
                values.append(float(m.group()))
            except ValueError:
                raise GridParseError(f"non-numeric height token {m.group()!r}",
                                     line_no + 1, m.start() + 1) from None
        if len(values) != n_cols:
            raise GridParseError(
                f"row {len(rows)} has {len(values)} values, expected {n_cols}",
                line_no + 1)
        rows.append(tuple(values))
    if len(rows) != n_rows:
        raise GridParseError(
            f"grid truncated: got {len(rows)} rows, expected {n_rows} "
            f"(row {len(rows)} missing)", len(lines) + 1)

    try:
        origin = GeodeticPosition(header["origin_lat"], header["origin_lon"], 0.0)
        return HeightField(origin=origin, cell_size_m=header["cellsize_m"],
                           n_cols=n_cols, n_rows=n_rows, heights=tuple(rows))
    except ValueError as exc:
        raise GridParseError(str(exc), 1) from None


def save_ascii_grid(field: HeightField) -> str:
    """Serialize to the ASCII grid format; heights keep 6 fractional digits."""
    out = [
        f"ncols {field.n_cols}",
        f"nrows {field.n_rows}",
        f"origin_lat {field.origin.latitude_deg!r}",
        f"origin_lon {field.origin.longitude_deg!r}",
        f"cellsize_m {field.cell_size_m!r}",
    ]
    for row in field.heights:
        out.append(" ".join(f"{h:.6f}" for h in row))
    return "\n".join(out) + "\n"


def synthetic_field(width_m: float, depth_m: float, slope_m: float, base_m: float,
                    cell_size_m: float = 10.0,
                    origin: GeodeticPosition | None = None) -> HeightField:
    """Linear ramp terrain: ``base_m`` at the south edge rising by ``slope_m``
    across ``depth_m`` of northing. Covers at least ``width_m`` x ``depth_m``."""
    if width_m <= 0 or depth_m <= 0 or cell_size_m <= 0:
        raise ValueError("extents and cell size must be positive")
    if origin is None:
        origin = GeodeticPosition(51.03, 13.73, 0.0)
    n_cols = max(2, math.ceil(width_m / cell_size_m - 1e-9) + 1)
    n_rows = max(2, math.ceil(depth_m / cell_size_m - 1e-9) + 1)
    rows = []
    for r in range(n_rows):  # r = 0 is the northernmost row
        y = (n_rows - 1 - r) * cell_size_m
        h = base_m + slope_m * (y / depth_m)
        rows.append(tuple(h for _ in range(n_cols)))
    return HeightField(origin=origin, cell_size_m=cell_size_m,
                       n_cols=n_cols, n_rows=n_rows, heights=tuple(rows))
