from typing import Iterable


class InvalidPlant(ValueError):
    pass


class DimensionMismatch(InvalidPlant):
    def __init__(self, names: Iterable[str], detail: str = ''):
        self.names = sorted(set(names))
        super().__init__(f'Inconsistent dimensions for {", ".join(self.names)}' + (f': {detail}' if detail else ''))


class SensorFaultRankViolation(InvalidPlant):
    pass


class InvalidLipschitzConstant(InvalidPlant):
    pass


class UnknownNonlinearity(InvalidPlant):
    pass


class InvalidUncertaintyModel(ValueError):
    pass


class KindArgumentMismatch(InvalidUncertaintyModel):
    pass
