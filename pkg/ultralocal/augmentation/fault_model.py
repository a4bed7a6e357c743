from dataclasses import dataclass

import numpy as np


class InvalidOrder(ValueError):
    pass


@dataclass(frozen=True)
class FaultInternalModel:
    """
    Ultra-local fault model: the fault f and its first r-1 derivatives as a chain of r integrators driven by f^(r)

        zeta' = chain zeta + input f^(r),    f = selector zeta
    """
    n_f: int
    r: int
    chain: np.ndarray
    input: np.ndarray
    selector: np.ndarray

    @property
    def size(self) -> int:
        return self.r * self.n_f


def build_fault_internal_model(n_f: int, r: int) -> FaultInternalModel:
    if n_f < 1 or r < 1:
        raise InvalidOrder(f'Fault internal model needs n_f >= 1 and r >= 1, got n_f={n_f}, r={r}')
    size = r * n_f
    chain = np.eye(size, k=n_f)
    input = np.zeros((size, n_f))
    input[-n_f:, :] = np.eye(n_f)
    selector = np.zeros((n_f, size))
    selector[:, :n_f] = np.eye(n_f)
    for arr in (chain, input, selector):
        arr.setflags(write=False)
    return FaultInternalModel(n_f, r, chain, input, selector)
