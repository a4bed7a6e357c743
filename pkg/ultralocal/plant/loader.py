"""
JSON plant documents.

Matrices are row-major nested lists. Nonlinearities are referenced by registered name plus parameters, e.g.
``"g": {"name": "sin", "params": {"gain": 1.0}}``.
"""
import json
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
import typedload

from ultralocal.plant.model import MATRIX_NAMES, PlantModel, ValidatedPlant, validate_plant
from ultralocal.plant.nonlinearities import Nonlinearity, make_nonlinearity
from ultralocal.plant.uncertainty import UncertaintyModel

logger = logging.getLogger(__name__)

Matrix = List[List[float]]


@dataclass
class NonlinearityDocument:
    name: str
    params: Dict[str, Any] = field(default_factory=dict)

    def build(self) -> Nonlinearity:
        return make_nonlinearity(self.name, self.params)


@dataclass
class PlantDocument:
    A: Matrix
    B_u: Matrix
    S_g: Matrix
    V_g: Matrix
    S_eta: Matrix
    V_eta: Matrix
    B_f: Matrix
    B_omega: Matrix
    C: Matrix
    D_f: Matrix
    D_nu: Matrix
    g: NonlinearityDocument
    eta: Optional[NonlinearityDocument] = None
    alpha_g: Optional[float] = None
    name: str = 'plant'


@dataclass
class UncertaintyDocument:
    kind: str = 'none'
    theta_x: Optional[Matrix] = None
    theta_y: Optional[Matrix] = None
    T_eta: Optional[Matrix] = None
    eta_lx: Optional[NonlinearityDocument] = None

    def build(self) -> UncertaintyModel:
        return UncertaintyModel(
            self.kind,
            theta_x=self.theta_x,
            theta_y=self.theta_y,
            T_eta=self.T_eta,
            eta_lx=self.eta_lx.build() if self.eta_lx else None,
        )


def plant_from_dict(doc: Dict[str, Any]) -> ValidatedPlant:
    parsed = typedload.load(doc, PlantDocument)
    plant = PlantModel(
        **{name: np.array(getattr(parsed, name), dtype=float) for name in MATRIX_NAMES},
        g=parsed.g.build(),
        eta=parsed.eta.build() if parsed.eta else None,
        alpha_g_override=parsed.alpha_g,
        name=parsed.name,
    )
    return validate_plant(plant)


def plant_to_dict(p: ValidatedPlant) -> Dict[str, Any]:
    plant = p.plant
    doc = PlantDocument(
        **{name: getattr(plant, name).tolist() for name in MATRIX_NAMES},
        g=NonlinearityDocument(plant.g.name, dict(plant.g.params)),
        eta=NonlinearityDocument(plant.eta.name, dict(plant.eta.params)) if plant.eta else None,
        alpha_g=plant.alpha_g_override,
        name=plant.name,
    )
    return typedload.dump(doc)


def load_plant(path: str) -> ValidatedPlant:
    logger.info(f'Loading plant from {path}')
    with open(path) as f:
        return plant_from_dict(json.load(f))


def uncertainty_from_dict(doc: Dict[str, Any]) -> UncertaintyModel:
    return typedload.load(doc, UncertaintyDocument).build()
