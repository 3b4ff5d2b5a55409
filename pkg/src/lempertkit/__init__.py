"""Invariant distances, indicatrices and extremal discs on 2-D domains with finite universal sets."""

from .disc_geometry import UnitDiscPoint, mobius, poincare_distance, poincare_metric
from .domain import (
    DomainSpec,
    caratheodory_distance,
    caratheodory_metric,
    contains,
    make_bidisc,
    make_custom,
    make_dab,
)
from .indicatrix import build_indicatrix, line_configuration, minkowski
from .lempert import kobayashi_metric_upper, lempert_gap, lempert_upper
from .rigidity import classify_map, classify_point, make_grid
from .rlinear import RLinearMap1, RLinearMap2, classify, lemma5_verdict, line_rigidity_verdict

__all__ = [
    "DomainSpec",
    "RLinearMap1",
    "RLinearMap2",
    "UnitDiscPoint",
    "build_indicatrix",
    "caratheodory_distance",
    "caratheodory_metric",
    "classify",
    "classify_map",
    "classify_point",
    "contains",
    "kobayashi_metric_upper",
    "lemma5_verdict",
    "line_rigidity_verdict",
    "lempert_gap",
    "lempert_upper",
    "line_configuration",
    "make_bidisc",
    "make_custom",
    "make_dab",
    "make_grid",
    "minkowski",
    "mobius",
    "poincare_distance",
    "poincare_metric",
]
