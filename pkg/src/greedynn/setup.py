"""Quadrature presets and problem assembly.

``paper`` presets are the full-scale integration settings; ``desk``
presets are reduced so runs fit on one CPU core.
Every reduction is explicit here and is logged when used.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .evalspace import Discretization, EnergyForm
from .problems import PdeInstance, catalog_lookup
from .quadrature import boundary_rule, composite_gauss, sobol_rule

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class QuadSpec:
    """How to integrate: Gauss cells/order or a Sobol point count."""

    cells: int | None = None
    order: int = 3
    qmc_points: int | None = None
    boundary_cells: int | None = None
    boundary_order: int = 3
    boundary_qmc_points: int | None = None

    def volume(self, d: int):
        if self.qmc_points is not None:
            return sobol_rule(d, self.qmc_points)
        return composite_gauss(d, self.cells, self.order)

    def boundary(self, d: int):
        if self.boundary_qmc_points is not None:
            return boundary_rule(d, qmc_points=self.boundary_qmc_points)
        return boundary_rule(d, subdivisions=self.boundary_cells or self.cells, order=self.boundary_order)

    def describe(self) -> str:
        vol = (f"sobol {self.qmc_points}" if self.qmc_points is not None
               else f"gauss {self.cells}^d cells x {self.order}^d pts")
        if self.boundary_qmc_points is not None:
            return vol + f"; boundary sobol {self.boundary_qmc_points}/face"
        if self.boundary_cells is not None:
            return vol + f"; boundary gauss {self.boundary_cells}^(d-1) cells"
        return vol


PAPER = {
    "sine1d": QuadSpec(cells=1024, order=5),
    "gabor1d": QuadSpec(cells=1024, order=5),
    "sine2d": QuadSpec(cells=50, order=3),
    "gabor2d": QuadSpec(cells=50, order=3),
    "sines3d": QuadSpec(cells=25, order=3),
    "sines4d": QuadSpec(qmc_points=500_000),
    "gauss4d": QuadSpec(qmc_points=500_000),
    "gauss10d": QuadSpec(qmc_points=1_000_000),
    "neumann3d-const": QuadSpec(cells=50, order=3),
    "neumann3d-osc": QuadSpec(cells=50, order=3),
    "neumann4d": QuadSpec(qmc_points=500_000, boundary_cells=50, boundary_order=3),
    "neumann10d": QuadSpec(qmc_points=2_000_000, boundary_qmc_points=200_000),
}

DESK = {
    "sine1d": QuadSpec(cells=256, order=5),
    "gabor1d": QuadSpec(cells=1024, order=5),
    "sine2d": QuadSpec(cells=50, order=3),
    "gabor2d": QuadSpec(cells=50, order=3),
    "sines3d": QuadSpec(cells=12, order=3),
    "sines4d": QuadSpec(qmc_points=100_000),
    "gauss4d": QuadSpec(qmc_points=100_000),
    "gauss10d": QuadSpec(qmc_points=200_000),
    "neumann3d-const": QuadSpec(cells=25, order=3),
    "neumann3d-osc": QuadSpec(cells=25, order=3),
    "neumann4d": QuadSpec(qmc_points=100_000, boundary_cells=20, boundary_order=3),
    "neumann10d": QuadSpec(qmc_points=200_000, boundary_qmc_points=20_000),
}

PRESETS = {"paper": PAPER, "desk": DESK}


def quad_spec(problem_id: str, preset: str = "desk", **overrides) -> QuadSpec:
    try:
        base = PRESETS[preset][problem_id]
    except KeyError:
        raise KeyError(f"no {preset!r} quadrature preset for {problem_id!r}") from None
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if "cells" in overrides or "order" in overrides:
        base = QuadSpec(**{**base.__dict__, "qmc_points": None})
    spec = QuadSpec(**{**base.__dict__, **overrides})
    if preset != "paper" and spec != PAPER[problem_id]:
        log.info("%s: quadrature reduced from full-scale setting (%s) to %s",
                 problem_id, PAPER[problem_id].describe(), spec.describe())
    return spec


def make_discretization(problem_id: str, preset: str = "desk", spec: QuadSpec | None = None,
                        **overrides) -> Discretization:
    """Training discretization for a catalog problem."""
    item = catalog_lookup(problem_id)
    spec = spec or quad_spec(problem_id, preset, **overrides)
    rule = spec.volume(item.d)
    if isinstance(item, PdeInstance):
        boundary = spec.boundary(item.d) if item.g is not None else None
        form = EnergyForm("elliptic", alpha=item.alpha, f=item.f, g=item.g, boundary=boundary)
        return Discretization(rule, form, exact=item.u, exact_grad=item.grad)
    return Discretization(rule, EnergyForm("L2"), target=item.u, exact_grad=item.grad)
