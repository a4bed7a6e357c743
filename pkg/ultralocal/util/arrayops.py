from typing import List, Sequence, Tuple, Union

import numpy as np

Num = Union[int, float]


def monotonic(seq: Union[Sequence[Num], np.ndarray], increasing: bool = True) -> bool:
    arr = np.array(seq)
    diff = arr[1:] - arr[:-1]
    if increasing:
        return bool(np.all(diff > 0))
    else:
        return bool(np.all(diff < 0))


def uniform_grid(seq: Union[Sequence[Num], np.ndarray], rtol: float = 1e-9) -> bool:
    """Strictly increasing with a constant step (to `rtol` of the step)."""
    arr = np.asarray(seq, dtype=float)
    if arr.size < 2:
        return True
    diff = np.diff(arr)
    return monotonic(arr) and bool(np.all(np.abs(diff - diff[0]) <= rtol * abs(diff[0])))


def contiguous_regions(condition: np.ndarray) -> List[Tuple[int, int]]:
    """(start, end) index pairs, end exclusive, of the runs where `condition` is True."""
    condition = np.asarray(condition, dtype=bool)
    if not condition.size:
        return []
    d = np.diff(condition.astype(np.int8))
    idx, = d.nonzero()
    idx += 1
    if condition[0]:
        idx = np.r_[0, idx]
    if condition[-1]:
        idx = np.r_[idx, condition.size]
    return [(int(s), int(e)) for s, e in idx.reshape(-1, 2)]


def rowwise_norm(arr: np.ndarray) -> np.ndarray:
    """Euclidean norm of each row of a (T, k) array; zero for k == 0."""
    arr = np.asarray(arr, dtype=float)
    if arr.ndim == 1:
        return np.abs(arr)
    if arr.shape[1] == 0:
        return np.zeros(arr.shape[0])
    return np.linalg.norm(arr, axis=1)
