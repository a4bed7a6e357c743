from ultralocal.augmentation.augmented_system import AugmentedDimensions, AugmentedSystem, augment
from ultralocal.augmentation.fault_model import FaultInternalModel, InvalidOrder, build_fault_internal_model
