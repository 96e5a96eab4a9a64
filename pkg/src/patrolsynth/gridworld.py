"""Grid-world construction for the transport-and-surveillance case study.

Cells are 8-connected; horizontal and vertical moves take 2 time units,
diagonal moves 3.  Two stock cells carry the pickup/delivery propositions
`a` and `b` and are the surveillance states; a base cell carries `c`; unsafe
cells carry `u`.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .model import TransitionSystem
from .penalty import PenaltyField

STRAIGHT_WEIGHT = 2
DIAGONAL_WEIGHT = 3

MISSION_FORMULA = (
    "G (a -> X (!a U b)) & G (b -> X (!b U a)) & G F c & G !u & G F sur"
)


def cell_id(row: int, col: int) -> str:
    return f"r{row:02d}c{col:02d}"


def _check_cell(cell, width, height, what):
    row, col = cell
    if not (0 <= row < height and 0 <= col < width):
        raise ValueError(f"{what} {cell!r} outside a {width}x{height} grid")
    return (row, col)


def generate_grid(
    width: int,
    height: int,
    stocks,
    base,
    unsafe,
    prob,
    rate: int = 5,
    surveillance_prop: str = "sur",
) -> tuple[TransitionSystem, PenaltyField]:
    """Build the grid system and its penalty field.

    `stocks` holds exactly two distinct (row, col) cells, `base` one cell,
    `unsafe` a set of cells disjoint from stocks and base.  `prob` maps every
    cell to its penalty hold probability.
    """
    if width < 1 or height < 1 or width * height < 2:
        raise ValueError("grid must contain at least two cells")
    stocks = [_check_cell(c, width, height, "stock") for c in stocks]
    if len(stocks) != 2 or stocks[0] == stocks[1]:
        raise ValueError("exactly two distinct stock cells are required")
    base = _check_cell(base, width, height, "base")
    unsafe = {_check_cell(c, width, height, "unsafe cell") for c in unsafe}
    if unsafe & {*stocks, base}:
        raise ValueError("unsafe cells must be distinct from stocks and base")

    transitions = []
    for row in range(height):
        for col in range(width):
            src = cell_id(row, col)
            for drow in (-1, 0, 1):
                for dcol in (-1, 0, 1):
                    if drow == dcol == 0:
                        continue
                    nrow, ncol = row + drow, col + dcol
                    if not (0 <= nrow < height and 0 <= ncol < width):
                        continue
                    weight = DIAGONAL_WEIGHT if drow and dcol else STRAIGHT_WEIGHT
                    transitions.append((src, cell_id(nrow, ncol), weight))

    labels: dict[str, set[str]] = {}

    def mark(cell, prop):
        labels.setdefault(cell_id(*cell), set()).add(prop)

    mark(stocks[0], "a")
    mark(stocks[1], "b")
    mark(stocks[0], surveillance_prop)
    mark(stocks[1], surveillance_prop)
    mark(base, "c")
    for cell in unsafe:
        mark(cell, "u")

    cells = [cell_id(r, c) for r in range(height) for c in range(width)]
    ts = TransitionSystem(
        cells,
        transitions,
        labels,
        cell_id(*base),
        ap=frozenset({"a", "b", "c", "u", surveillance_prop}),
    )

    probabilities = {}
    for row in range(height):
        for col in range(width):
            try:
                probabilities[cell_id(row, col)] = Fraction(prob[(row, col)])
            except KeyError:
                raise ValueError(f"no penalty probability for cell {(row, col)}") from None
    field = PenaltyField(rate, probabilities)
    return ts, field


def radial_probability_map(
    width: int,
    height: int,
    low: Fraction = Fraction(1, 10),
    high: Fraction = Fraction(9, 10),
    center: tuple[int, int] | None = None,
    exponent: int = 3,
) -> dict:
    """Probabilities rising from `low` at the center to `high` at the far
    corner, as (distance/max)**exponent, quantized to thousandths."""
    if center is None:
        center = ((height - 1) // 2, (width - 1) // 2)
    crow, ccol = center
    max_dist = 0.0
    for corner_row in (0, height - 1):
        for corner_col in (0, width - 1):
            max_dist = max(
                max_dist, math.hypot(corner_row - crow, corner_col - ccol)
            )
    out = {}
    for row in range(height):
        for col in range(width):
            d = math.hypot(row - crow, col - ccol)
            scaled = d / max_dist if max_dist else 0.0
            factor = scaled
            for _ in range(exponent - 1):
                factor *= scaled
            fraction = Fraction(round(factor * 1000), 1000)
            out[(row, col)] = low + (high - low) * fraction
    return out


def case_study():
    """The packaged 9x5 transport scenario.

    Stocks sit on the central row four cells apart, the base lies between
    them, two unsafe cells pinch the central column, and the probability map
    is the cubic radial gradient.  Rate 5, visibility 6, horizon 9.
    """
    width, height = 9, 5
    stocks = [(2, 2), (2, 6)]
    base = (2, 4)
    unsafe = {(1, 4), (3, 4), (0, 0), (4, 8)}
    prob = radial_probability_map(width, height)
    ts, field = generate_grid(width, height, stocks, base, unsafe, prob, rate=5)
    params = {"visibility": 6, "horizon": 9}
    return ts, field, MISSION_FORMULA, params
