from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np

from ultralocal.plant.invalid_plant import InvalidUncertaintyModel, KindArgumentMismatch
from ultralocal.plant.model import as_matrix
from ultralocal.plant.nonlinearities import Nonlinearity


UncertaintyKind = Literal['none', 'linear-state', 'linear-output', 'nonlinear-state']
ArgumentKind = Literal['state', 'output']

UNCERTAINTY_KINDS = ('none', 'linear-state', 'linear-output', 'nonlinear-state')
STATE_KINDS = ('linear-state', 'nonlinear-state')
OUTPUT_KINDS = ('linear-output', )

_KIND_FIELDS = {
    'none': (),
    'linear-state': ('theta_x', ),
    'linear-output': ('theta_y', 'T_eta'),
    'nonlinear-state': ('eta_lx', ),
}


@dataclass(frozen=True)
class UncertaintyModel:
    """
    Prior approximation eta_l of the plant uncertainty eta = eta_l + delta_eta. The design treats eta_l as known and
    delta_eta as a perturbation.

        none:            eta_l = 0
        linear-state:    eta_l = theta_x V_eta x
        linear-output:   eta_l = theta_y T_eta y
        nonlinear-state: eta_l = eta_lx(V_eta x, u, t)
    """
    kind: UncertaintyKind = 'none'
    theta_x: Optional[np.ndarray] = None
    theta_y: Optional[np.ndarray] = None
    T_eta: Optional[np.ndarray] = None
    eta_lx: Optional[Nonlinearity] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.kind not in UNCERTAINTY_KINDS:
            raise InvalidUncertaintyModel(f'Unknown uncertainty model kind {self.kind!r}')
        required = _KIND_FIELDS[self.kind]
        populated = tuple(name for name in ('theta_x', 'theta_y', 'T_eta', 'eta_lx') if getattr(self, name) is not None)
        if set(populated) != set(required):
            raise InvalidUncertaintyModel(
                f'Uncertainty model of kind {self.kind!r} requires exactly {list(required)}, got {list(populated)}'
            )
        for name in ('theta_x', 'theta_y', 'T_eta'):
            if getattr(self, name) is not None:
                object.__setattr__(self, name, as_matrix(getattr(self, name), name))
        if self.kind == 'linear-output' and self.theta_y.shape[1] != self.T_eta.shape[0]:
            raise InvalidUncertaintyModel(f'theta_y is {self.theta_y.shape} but T_eta selects {self.T_eta.shape[0]} outputs')

    @property
    def alpha_eta(self) -> float:
        if self.kind == 'nonlinear-state':
            return self.eta_lx.lipschitz
        return 0.

    @property
    def state_dependent(self) -> bool:
        return self.kind in STATE_KINDS

    @classmethod
    def none(cls) -> 'UncertaintyModel':
        return cls('none')

    @classmethod
    def linear_state(cls, theta_x: np.ndarray) -> 'UncertaintyModel':
        return cls('linear-state', theta_x=theta_x)

    @classmethod
    def linear_output(cls, theta_y: np.ndarray, T_eta: np.ndarray) -> 'UncertaintyModel':
        return cls('linear-output', theta_y=theta_y, T_eta=T_eta)

    @classmethod
    def nonlinear_state(cls, eta_lx: Nonlinearity) -> 'UncertaintyModel':
        return cls('nonlinear-state', eta_lx=eta_lx)


def eval_uncertainty_model(
        u_model: UncertaintyModel,
        x_or_y: np.ndarray,
        u: np.ndarray,
        t: float,
        argument: ArgumentKind = 'state',
        V_eta: Optional[np.ndarray] = None,
        n_eta: Optional[int] = None) -> np.ndarray:
    """
    Evaluate eta_l. State kinds take a state (projected through `V_eta` when given, otherwise assumed to be V_eta x
    already); linear-output takes a measured output.

    `n_eta` sizes the zero vector for kind none (empty when not given).
    """
    value = np.asarray(x_or_y, dtype=float)
    if u_model.kind == 'none':
        return np.zeros(n_eta or 0)

    if u_model.kind in STATE_KINDS:
        if argument != 'state':
            raise KindArgumentMismatch(f'Uncertainty model of kind {u_model.kind!r} expects a state, got an {argument}')
        projected = value if V_eta is None else V_eta @ value
        if u_model.kind == 'linear-state':
            if projected.shape != (u_model.theta_x.shape[1], ):
                raise KindArgumentMismatch(
                    f'theta_x expects a projected state of length {u_model.theta_x.shape[1]}, got {projected.shape}'
                )
            return u_model.theta_x @ projected
        return u_model.eta_lx(projected, u, t)

    if argument != 'output':
        raise KindArgumentMismatch(f'Uncertainty model of kind {u_model.kind!r} expects an output, got a {argument}')
    if value.shape != (u_model.T_eta.shape[1], ):
        raise KindArgumentMismatch(f'T_eta expects an output of length {u_model.T_eta.shape[1]}, got {value.shape}')
    return u_model.theta_y @ (u_model.T_eta @ value)
