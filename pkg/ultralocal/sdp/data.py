from dataclasses import dataclass, field
from typing import List, Protocol, Sequence

import numpy as np

from ultralocal.sdp.linalg import asymmetry, symmetrize


class InvalidProblem(ValueError):
    pass


class ConstraintLike(Protocol):
    label: str
    constant: np.ndarray
    coefficients: np.ndarray
    sense: str


class ProblemLike(Protocol):
    constraints: Sequence[ConstraintLike]
    objective: np.ndarray


@dataclass
class SdpData:
    """
    Block-diagonal SDP in dual standard form

        maximise   b^T y
        subject to Z_k = C_k - sum_i y_i A_k[i]  >= 0   for every block k

    whose conic dual is: minimise sum_k <C_k, X_k> subject to sum_k <A_k[i], X_k> = b_i, X_k >= 0.

    A synthesis problem "minimise c^T x subject to affine LMIs" maps onto it with y = x, b = -c.
    """
    b: np.ndarray
    C: List[np.ndarray]
    A: List[np.ndarray]
    labels: List[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.b = np.asarray(self.b, dtype=float)
        if not self.labels:
            self.labels = [f'block{k}' for k in range(len(self.C))]
        if len(self.C) != len(self.A) or len(self.labels) != len(self.C):
            raise InvalidProblem('C, A and labels must have one entry per block')
        for k, (C, A) in enumerate(zip(self.C, self.A)):
            s = C.shape[0]
            if C.shape != (s, s) or A.shape != (self.b.size, s, s):
                raise InvalidProblem(
                    f'Block {self.labels[k]!r}: C is {C.shape}, A is {A.shape}, expected ({s}, {s}) and ({self.b.size}, {s}, {s})'
                )
            scale = max(1., float(np.max(np.abs(C), initial=0.)), float(np.max(np.abs(A), initial=0.)))
            if max(asymmetry(C), asymmetry(A)) > 1e-12 * scale:
                raise InvalidProblem(f'Block {self.labels[k]!r} is not symmetric')
            self.C[k] = symmetrize(C)
            self.A[k] = symmetrize(A)

    @property
    def n_vars(self) -> int:
        return self.b.size

    @property
    def block_sizes(self) -> List[int]:
        return [C.shape[0] for C in self.C]

    def slack(self, y: np.ndarray) -> List[np.ndarray]:
        return [C - np.tensordot(y, A, axes=1) for C, A in zip(self.C, self.A)]

    def adjoint(self, y: np.ndarray) -> List[np.ndarray]:
        return [np.tensordot(y, A, axes=1) for A in self.A]

    def apply(self, X: Sequence[np.ndarray]) -> np.ndarray:
        """The linear map X -> (sum_k <A_k[i], X_k>)_i."""
        out = np.zeros(self.n_vars)
        for A, Xk in zip(self.A, X):
            out += np.einsum('iab,ab->i', A, Xk)
        return out


def to_sdp_data(problem: ProblemLike) -> SdpData:
    """
    `problem` carries affine constraints F(x) = F0 + sum_i x_i F_i with sense 'nsd' (F(x) <= 0) or 'psd' (F(x) >= 0),
    and a linear objective c to minimise.
    """
    C, A, labels = [], [], []
    for constraint in problem.constraints:
        if constraint.sense == 'nsd':
            C.append(-constraint.constant)
            A.append(np.array(constraint.coefficients))
        elif constraint.sense == 'psd':
            C.append(np.array(constraint.constant))
            A.append(-constraint.coefficients)
        else:
            raise InvalidProblem(f'Unknown constraint sense {constraint.sense!r}')
        labels.append(constraint.label)
    return SdpData(-np.asarray(problem.objective, dtype=float), C, A, labels)
