"""Reproduction harness for the two published ruin-probability grids.

Both grids tabulate psi(u) at u = 1..5 for five intensity shapes.  The
power grid uses lam(u) = (u^beta + 1) * eta(u); its published beta > 0
rows disagree with the defining integral, so cells carry the published
number, the closed-form value, and an independent quadrature value side
by side instead of forcing agreement.  The critical-ratio grid uses
lam(u) = (1 + beta/(1+u)) * eta(u), whose closed form is rational and
does match the published numbers.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .functions import Constant, HyperbolicShift, PowerShift
from .model import DualRiskModel
from .ruin import ruin_probability, ruin_probability_closed

__all__ = [
    "TABLE_US",
    "TABLE3_BETAS",
    "TABLE4_BETAS",
    "TABLE3_PRINTED",
    "TABLE4_PRINTED",
    "TableCell",
    "table3_model",
    "table4_model",
    "table_cells",
    "save_figure",
    "write_report",
]

TABLE_US = (1.0, 2.0, 3.0, 4.0, 5.0)
TABLE3_BETAS = (0.0, 0.5, 1.0, 1.5, 2.0)
TABLE4_BETAS = (1.5, 2.0, 2.5, 3.0, 3.5)

# Published values, quoted to the four decimals they were printed with.
TABLE3_PRINTED = {
    0.0: (0.3679, 0.1353, 0.0498, 0.0183, 0.0067),
    0.5: (0.4325, 0.1184, 0.0233, 0.0035, 0.0004),
    1.0: (0.4867, 0.0981, 0.0076, 0.0002, 0.0000),
    1.5: (0.5343, 0.0747, 0.0013, 0.0000, 0.0000),
    2.0: (0.5756, 0.0506, 0.0001, 0.0000, 0.0000),
}
TABLE4_PRINTED = {
    1.5: (0.5893, 0.4491, 0.3750, 0.3280, 0.2948),
    2.0: (0.3750, 0.2222, 0.1562, 0.1200, 0.0972),
    2.5: (0.2475, 0.1155, 0.0688, 0.0465, 0.0340),
    3.0: (0.1667, 0.0617, 0.0312, 0.0187, 0.0123),
    3.5: (0.1136, 0.0336, 0.0145, 0.0077, 0.0046),
}


def table3_model(beta):
    """Unit cost with intensity u^beta + 1 (constant 2 when beta = 0)."""
    if beta == 0.0:
        return DualRiskModel(eta=Constant(1.0), lam=Constant(2.0), gamma=1.0)
    return DualRiskModel(eta=Constant(1.0), lam=PowerShift(1.0, float(beta), 1.0),
                         gamma=1.0)


def table4_model(beta):
    """Unit cost with intensity 1 + beta/(1+u)."""
    return DualRiskModel(eta=Constant(1.0),
                         lam=HyperbolicShift(1.0, float(beta), 1),
                         gamma=1.0)


@dataclass(frozen=True)
class TableCell:
    """One grid entry: published number plus both computed routes."""

    beta: float
    u: float
    printed: float
    closed_form: float
    quadrature: float


def _grid(betas, printed, build):
    cells = []
    for beta in betas:
        model = build(beta)
        for u, published in zip(TABLE_US, printed[beta]):
            cells.append(TableCell(
                beta=beta,
                u=u,
                printed=published,
                closed_form=float(ruin_probability_closed(model, u).psi),
                quadrature=float(ruin_probability(model, u).psi),
            ))
    return tuple(cells)


def table_cells(table_id):
    """All 25 cells of one grid, row by row.

    Args:
        table_id: 3 for the power grid, 4 for the critical-ratio grid.

    Returns:
        Tuple of :class:`TableCell` in (beta, u) order.

    Raises:
        DomainError: If ``table_id`` is neither 3 nor 4.
    """
    if table_id == 3:
        return _grid(TABLE3_BETAS, TABLE3_PRINTED, table3_model)
    if table_id == 4:
        return _grid(TABLE4_BETAS, TABLE4_PRINTED, table4_model)
    raise DomainError(f"table_id: expected 3 or 4, got {table_id!r}")


def _figure_curves(table_id):
    if table_id == 3:
        return TABLE3_BETAS, table3_model, "intensity u^b + 1"
    if table_id == 4:
        return TABLE4_BETAS, table4_model, "intensity 1 + b/(1+u)"
    raise DomainError(f"table_id: expected 3 or 4, got {table_id!r}")


def save_figure(table_id, path):
    """Render psi(u) curves for one grid's intensity family to a file.

    The curves come from the closed forms on a dense wealth grid, with
    markers at the tabulated integer wealth levels.
    """
    from matplotlib.backends.backend_agg import FigureCanvasAgg
    from matplotlib.figure import Figure

    betas, build, subtitle = _figure_curves(table_id)
    figure = Figure(figsize=(6.4, 4.4))
    FigureCanvasAgg(figure)
    axes = figure.add_subplot()
    dense = np.linspace(0.0, 5.0, 101)
    for beta in betas:
        model = build(beta)
        curve = [ruin_probability_closed(model, float(u)).psi for u in dense]
        line, = axes.plot(dense, curve, label=f"b = {beta:g}")
        marks = [ruin_probability_closed(model, u).psi for u in TABLE_US]
        axes.plot(TABLE_US, marks, "o", color=line.get_color(), markersize=4)
    axes.set_xlabel("initial wealth u")
    axes.set_ylabel("ruin probability")
    axes.set_title(f"Ruin probability, {subtitle}")
    axes.set_xlim(0.0, 5.0)
    axes.set_ylim(0.0, 1.0)
    axes.grid(True, alpha=0.3)
    axes.legend()
    figure.savefig(path, dpi=150, bbox_inches="tight")


def _write_cells_csv(cells, path):
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["beta", "u", "printed", "closed_form", "quadrature"])
        for cell in cells:
            writer.writerow([
                format(cell.beta, ".17g"),
                format(cell.u, ".17g"),
                format(cell.printed, ".4f"),
                format(cell.closed_form, ".17g"),
                format(cell.quadrature, ".17g"),
            ])


def write_report(out_dir):
    """Write both grids as CSV plus one rendered figure per grid.

    Args:
        out_dir: Directory for the four files; created when missing.

    Returns:
        Paths of the written files, CSVs first.
    """
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for table_id in (3, 4):
        csv_path = os.path.join(out_dir, f"table{table_id}.csv")
        _write_cells_csv(table_cells(table_id), csv_path)
        written.append(csv_path)
    for table_id in (3, 4):
        figure_path = os.path.join(out_dir, f"table{table_id}.png")
        save_figure(table_id, figure_path)
        written.append(figure_path)
    return written
