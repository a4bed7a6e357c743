import logging
from dataclasses import dataclass, field
from typing import ClassVar, Dict, Optional

import numpy as np

from ultralocal.augmentation import AugmentedSystem
from ultralocal.plant import DimensionMismatch
from ultralocal.util import validate_fields

IDENTITY_RTOL = 1e-10


class IdentityViolation(RuntimeError):

    def __init__(self, identity: str, residual: float):
        super().__init__(f'Filter identity {identity} violated: relative residual {residual:.3g} > {IDENTITY_RTOL:.0e}')
        self.identity = identity
        self.residual = residual


def _relative(residual: np.ndarray, *terms: np.ndarray) -> float:
    scale = max([1.] + [float(np.linalg.norm(t)) for t in terms])
    return float(np.linalg.norm(residual)) / scale


@dataclass(eq=False)
@validate_fields
class FilterRealization:
    """
    Fault estimation filter

        z'    = N z + G u_a + L y + M S_ga g_a(V_ga xh + J (y - C_a xh), u_a, t),    xh = z - E y
        f_hat = C_bar xh

    with M = I + E C_a, N = M A_a - K C_a, G = M B_ua and L = K (I + C_a E) - M A_a E. N, G, L and M may be passed in
    (e.g. from a saved design); either way the defining and nullification identities are checked.
    """
    E: np.ndarray
    K: np.ndarray
    J: np.ndarray
    N: np.ndarray
    G: np.ndarray
    L: np.ndarray
    M: np.ndarray
    C_bar: np.ndarray
    aug: AugmentedSystem = field(repr=False, compare=False)

    logger: ClassVar[logging.Logger] = logging.getLogger(__qualname__)

    def __init__(
            self,
            aug: AugmentedSystem,
            E: np.ndarray,
            K: np.ndarray,
            J: np.ndarray,
            N: Optional[np.ndarray] = None,
            G: Optional[np.ndarray] = None,
            L: Optional[np.ndarray] = None,
            M: Optional[np.ndarray] = None):
        dims = aug.dims
        self.aug = aug
        self.E = np.array(E, dtype=float)
        self.K = np.array(K, dtype=float)
        self.J = np.array(J, dtype=float).reshape(dims.n_vga, dims.m)
        expected = {'E': (dims.n_z, dims.m), 'K': (dims.n_z, dims.m)}
        mismatched = [name for name, shape in expected.items() if getattr(self, name).shape != shape]
        if mismatched:
            raise DimensionMismatch(mismatched, ', '.join(f'{n} is {getattr(self, n).shape}, expected {expected[n]}' for n in mismatched))

        A, C, B = aug.A_a, aug.C_a, aug.B_ua
        I = np.eye(dims.n_z)
        self.M = I + self.E @ C if M is None else np.array(M, dtype=float)
        self.N = self.M @ A - self.K @ C if N is None else np.array(N, dtype=float)
        self.G = self.M @ B if G is None else np.array(G, dtype=float)
        self.L = self.K @ (np.eye(dims.m) + C @ self.E) - self.M @ A @ self.E if L is None else np.array(L, dtype=float)
        self.C_bar = np.array(aug.C_bar)
        for name in ('E', 'K', 'J', 'N', 'G', 'L', 'M', 'C_bar'):
            getattr(self, name).setflags(write=False)

        self.check_identities()

    def identity_residuals(self) -> Dict[str, float]:
        aug = self.aug
        A, C, B = aug.A_a, aug.C_a, aug.B_ua
        E, K, N, G, L, M = self.E, self.K, self.N, self.G, self.L, self.M
        return {
            'M = I + E C_a': _relative(M - np.eye(M.shape[0]) - E @ C, M, E @ C),
            'N = M A_a - K C_a': _relative(N - M @ A + K @ C, N, M @ A, K @ C),
            'G = M B_ua': _relative(G - M @ B, G, M @ B),
            'L = K (I + C_a E) - M A_a E': _relative(L - K - K @ C @ E + M @ A @ E, L, K, K @ C @ E, M @ A @ E),
            'N M + L C_a - M A_a = 0': _relative(N @ M + L @ C - M @ A, N @ M, L @ C, M @ A),
            'N E + L = K': _relative(N @ E + L - K, N @ E, L, K),
        }

    def check_identities(self) -> None:
        residuals = self.identity_residuals()
        for identity, residual in residuals.items():
            if not residual <= IDENTITY_RTOL:
                raise IdentityViolation(identity, residual)
        self.logger.debug(f'Filter identities hold, worst relative residual {max(residuals.values()):.3g}')

    def x_hat(self, z: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Estimate of the augmented state, z - E y."""
        return np.asarray(z, dtype=float) - self.E @ np.asarray(y, dtype=float)


def build_filter(aug: AugmentedSystem, E: np.ndarray, K: np.ndarray, J: np.ndarray) -> FilterRealization:
    return FilterRealization(aug, E, K, J)


def filter_rhs(fr: FilterRealization, z: np.ndarray, u_a: np.ndarray, y: np.ndarray, t: float) -> np.ndarray:
    aug = fr.aug
    z = np.asarray(z, dtype=float)
    y = np.asarray(y, dtype=float)
    u_a = np.asarray(u_a, dtype=float)
    dz = fr.N @ z + fr.G @ u_a + fr.L @ y
    if aug.dims.n_ga:
        xh = fr.x_hat(z, y)
        v = aug.V_ga @ xh + fr.J @ (y - aug.C_a @ xh)
        dz = dz + fr.M @ (aug.S_ga @ aug.g_a(v, u_a, t))
    return dz


def extract_fault(fr: FilterRealization, z: np.ndarray, y: np.ndarray) -> np.ndarray:
    return fr.C_bar @ fr.x_hat(z, y)


def matched_filter_state(fr: FilterRealization, x_a0: np.ndarray, nu0: Optional[np.ndarray] = None) -> np.ndarray:
    """Filter state with zero initial estimation error: M x_a(0) + E D_nu nu(0)."""
    z0 = fr.M @ np.asarray(x_a0, dtype=float)
    if nu0 is not None:
        z0 = z0 + fr.E @ (fr.aug.D_nu @ np.asarray(nu0, dtype=float))
    return z0
