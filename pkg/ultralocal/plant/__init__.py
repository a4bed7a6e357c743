from ultralocal.plant.invalid_plant import (
    DimensionMismatch,
    InvalidLipschitzConstant,
    InvalidPlant,
    InvalidUncertaintyModel,
    KindArgumentMismatch,
    SensorFaultRankViolation,
    UnknownNonlinearity,
)
from ultralocal.plant.loader import load_plant, plant_from_dict, plant_to_dict, uncertainty_from_dict
from ultralocal.plant.model import PlantDimensions, PlantModel, ValidatedPlant, numerical_rank, validate_plant
from ultralocal.plant.nonlinearities import Nonlinearity, make_nonlinearity, register_nonlinearity, registered_nonlinearities
from ultralocal.plant.uncertainty import UncertaintyModel, eval_uncertainty_model
