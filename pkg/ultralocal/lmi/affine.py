"""
Affine matrix expressions over one shared vector of scalar decision variables.

An `AffineExpr` of shape (r, c) is ``constant + sum_i x_i coefficients[i]``. Decision matrices are declared in a
`DecisionLayout`, which fixes where each matrix lives in x.
"""
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from ultralocal.sdp.linalg import smat, svec, svec_basis

Operand = Union['AffineExpr', np.ndarray, float]


class AffineExpr:
    # keeps `ndarray @ expr` and `ndarray + expr` from being broadcast by numpy
    __array_ufunc__ = None

    def __init__(self, constant: np.ndarray, coefficients: np.ndarray):
        self.constant = np.asarray(constant, dtype=float)
        self.coefficients = np.asarray(coefficients, dtype=float)
        if self.constant.ndim != 2 or self.coefficients.shape[1:] != self.constant.shape:
            raise ValueError(f'Inconsistent affine expression: constant {self.constant.shape}, coefficients {self.coefficients.shape}')

    @classmethod
    def const(cls, value: np.ndarray, n_vars: int) -> 'AffineExpr':
        value = np.atleast_2d(np.asarray(value, dtype=float))
        return cls(value, np.zeros((n_vars, ) + value.shape))

    @classmethod
    def zeros(cls, shape: Tuple[int, int], n_vars: int) -> 'AffineExpr':
        return cls(np.zeros(shape), np.zeros((n_vars, ) + tuple(shape)))

    @property
    def shape(self) -> Tuple[int, int]:
        return self.constant.shape  # type: ignore

    @property
    def n_vars(self) -> int:
        return self.coefficients.shape[0]

    @property
    def T(self) -> 'AffineExpr':
        return AffineExpr(self.constant.T, self.coefficients.transpose(0, 2, 1))

    def sym(self) -> 'AffineExpr':
        """X + X^T"""
        return self + self.T

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        return self.constant + np.tensordot(np.asarray(x, dtype=float), self.coefficients, axes=1)

    def kron_eye(self, k: int) -> 'AffineExpr':
        """s I_k for a 1x1 expression s."""
        if self.shape != (1, 1):
            raise ValueError(f'kron_eye needs a 1x1 expression, got {self.shape}')
        eye = np.eye(k)
        return AffineExpr(self.constant[0, 0] * eye, self.coefficients[:, 0, 0, None, None] * eye)

    def _coerce(self, other: Operand) -> 'AffineExpr':
        if isinstance(other, AffineExpr):
            if other.n_vars != self.n_vars:
                raise ValueError(f'Expressions over {self.n_vars} and {other.n_vars} variables cannot be combined')
            return other
        other = np.asarray(other, dtype=float)
        if other.ndim == 0:
            other = np.full(self.shape, float(other))
        return AffineExpr.const(other, self.n_vars)

    def __add__(self, other: Operand) -> 'AffineExpr':
        other = self._coerce(other)
        if other.shape != self.shape:
            raise ValueError(f'Cannot add {self.shape} and {other.shape}')
        return AffineExpr(self.constant + other.constant, self.coefficients + other.coefficients)

    __radd__ = __add__

    def __neg__(self) -> 'AffineExpr':
        return AffineExpr(-self.constant, -self.coefficients)

    def __sub__(self, other: Operand) -> 'AffineExpr':
        return self + (-self._coerce(other))

    def __rsub__(self, other: Operand) -> 'AffineExpr':
        return self._coerce(other) - self

    def __mul__(self, scalar: float) -> 'AffineExpr':
        if isinstance(scalar, AffineExpr) or np.ndim(scalar) != 0:
            raise TypeError('AffineExpr only supports multiplication by a scalar; use @ for matrices')
        return AffineExpr(self.constant * scalar, self.coefficients * scalar)

    __rmul__ = __mul__

    def __matmul__(self, other: np.ndarray) -> 'AffineExpr':
        if isinstance(other, AffineExpr):
            raise TypeError('Product of two affine expressions is not affine')
        other = np.asarray(other, dtype=float)
        return AffineExpr(self.constant @ other, self.coefficients @ other)

    def __rmatmul__(self, other: np.ndarray) -> 'AffineExpr':
        other = np.asarray(other, dtype=float)
        return AffineExpr(other @ self.constant, other @ self.coefficients)

    def __repr__(self) -> str:
        return f'AffineExpr(shape={self.shape}, n_vars={self.n_vars})'

    @staticmethod
    def block(rows: Sequence[Sequence[Optional[Operand]]], n_vars: Optional[int] = None) -> 'AffineExpr':
        """
        Assemble a block matrix. ``None`` entries are zero blocks, sized from the other blocks of their block row and
        block column. Blocks may have zero width or height.
        """
        if n_vars is None:
            n_vars = next((e.n_vars for row in rows for e in row if isinstance(e, AffineExpr)), None)
            if n_vars is None:
                raise ValueError('Cannot infer the number of variables of a constant block matrix')
        n_cols = len(rows[0])
        if any(len(row) != n_cols for row in rows):
            raise ValueError('Block rows have different lengths')

        heights: List[Optional[int]] = [None] * len(rows)
        widths: List[Optional[int]] = [None] * n_cols
        for i, row in enumerate(rows):
            for j, entry in enumerate(row):
                if entry is None:
                    continue
                h, w = entry.shape if isinstance(entry, AffineExpr) else np.atleast_2d(entry).shape
                if heights[i] not in (None, h) or widths[j] not in (None, w):
                    raise ValueError(f'Block ({i}, {j}) of shape {(h, w)} does not fit its row or column')
                heights[i], widths[j] = h, w
        if None in heights or None in widths:
            raise ValueError('A block row or column consists of zero blocks only; its size is unknown')

        row_offsets = np.concatenate([[0], np.cumsum(heights)]).astype(int)
        col_offsets = np.concatenate([[0], np.cumsum(widths)]).astype(int)
        constant = np.zeros((row_offsets[-1], col_offsets[-1]))
        coefficients = np.zeros((n_vars, row_offsets[-1], col_offsets[-1]))
        for i, row in enumerate(rows):
            for j, entry in enumerate(row):
                if entry is None:
                    continue
                rs = slice(row_offsets[i], row_offsets[i + 1])
                cs = slice(col_offsets[j], col_offsets[j + 1])
                if isinstance(entry, AffineExpr):
                    constant[rs, cs] = entry.constant
                    coefficients[:, rs, cs] = entry.coefficients
                else:
                    constant[rs, cs] = np.atleast_2d(entry)
        return AffineExpr(constant, coefficients)


@dataclass(frozen=True)
class VariableBlock:
    name: str
    shape: Tuple[int, int]
    symmetric: bool
    offset: int

    @property
    def size(self) -> int:
        if self.symmetric:
            n = self.shape[0]
            return n * (n + 1) // 2
        return self.shape[0] * self.shape[1]

    @property
    def slice(self) -> slice:
        return slice(self.offset, self.offset + self.size)


class DecisionLayout:
    """
    Ordered decision matrices. Symmetric matrices occupy their scaled svec, general matrices their row-major entries,
    scalars one slot.
    """

    def __init__(self) -> None:
        self.blocks: Dict[str, VariableBlock] = {}
        self.size = 0
        self._exprs: Dict[str, AffineExpr] = {}

    def _add(self, name: str, shape: Tuple[int, int], symmetric: bool) -> VariableBlock:
        if name in self.blocks:
            raise ValueError(f'Decision variable {name!r} declared twice')
        if self._exprs:
            raise ValueError('Cannot declare variables after expressions have been built')
        block = VariableBlock(name, shape, symmetric, self.size)
        self.blocks[name] = block
        self.size += block.size
        return block

    def add_symmetric(self, name: str, n: int) -> VariableBlock:
        return self._add(name, (n, n), True)

    def add_matrix(self, name: str, rows: int, cols: int) -> VariableBlock:
        return self._add(name, (rows, cols), False)

    def add_scalar(self, name: str) -> VariableBlock:
        return self._add(name, (1, 1), False)

    def expr(self, name: str) -> AffineExpr:
        if name not in self._exprs:
            block = self.blocks[name]
            coefficients = np.zeros((self.size, ) + block.shape)
            if block.symmetric:
                coefficients[block.slice] = svec_basis(block.shape[0])
            else:
                coefficients[block.slice] = np.eye(block.size).reshape((block.size, ) + block.shape)
            self._exprs[name] = AffineExpr(np.zeros(block.shape), coefficients)
        return self._exprs[name]

    def unpack(self, x: np.ndarray) -> Dict[str, np.ndarray]:
        """Scalars come back as 0-d arrays."""
        x = np.asarray(x, dtype=float)
        values: Dict[str, np.ndarray] = {}
        for name, block in self.blocks.items():
            chunk = x[block.slice]
            if block.symmetric:
                values[name] = smat(chunk)
            elif block.shape == (1, 1):
                values[name] = np.array(chunk[0])
            else:
                values[name] = chunk.reshape(block.shape).copy()
        return values

    def pack(self, values: Mapping[str, Union[np.ndarray, float]]) -> np.ndarray:
        x = np.zeros(self.size)
        for name, block in self.blocks.items():
            value = np.asarray(values[name], dtype=float)
            if block.symmetric:
                x[block.slice] = svec(0.5 * (value + value.T))
            else:
                x[block.slice] = value.reshape(-1)
        return x

    def unit(self, name: str) -> np.ndarray:
        """Objective vector picking out a scalar variable."""
        block = self.blocks[name]
        if block.shape != (1, 1):
            raise ValueError(f'{name!r} is not a scalar variable')
        c = np.zeros(self.size)
        c[block.offset] = 1.
        return c
