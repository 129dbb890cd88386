"""Dense tensor algebra: unfolding, folding, mode products and norms.

Tensors are plain ``float64`` numpy arrays stored row-major (last index
fastest). Modes are 0-based in the API. The mode-k unfolding uses the
Kolda-Bader column ordering: among the remaining modes, the lowest one
varies fastest, so that

    unfold(C x_1 U_1 ... x_m U_m, k) = U_k unfold(C, k) (U_m kron ... kron U_1)^T

with the mode-k factor omitted from the Kronecker product.
"""
from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .errors import ArgumentError


def as_tensor(values, dims: Sequence[int] | None = None) -> np.ndarray:
    """Validate and return a read-only float64 tensor.

    ``values`` may be any array-like; when ``dims`` is given the flat
    row-major ``values`` are reshaped to it.
    """
    t = np.array(values, dtype=np.float64)
    if dims is not None:
        dims = tuple(int(d) for d in dims)
        if any(d < 1 for d in dims) or len(dims) < 1:
            raise ArgumentError(f"extents must be positive, got {dims}")
        if t.size != int(np.prod(dims)):
            raise ArgumentError(
                f"{t.size} values do not fill a tensor of extents {dims}")
        t = t.reshape(dims)
    if t.ndim < 1 or 0 in t.shape:
        raise ArgumentError(f"tensor must have order >= 1 and positive extents, got {t.shape}")
    t.setflags(write=False)
    return t


def flat_offset(dims: Sequence[int], index: Sequence[int]) -> int:
    """Row-major offset of a 0-based multi-index."""
    offset = 0
    for d, i in zip(dims, index):
        offset = offset * d + i
    return offset


def _check_mode(ndim, mode):
    if not 0 <= mode < ndim:
        raise ArgumentError(f"mode {mode + 1} out of range for an order-{ndim} tensor")


def unfold(t: np.ndarray, mode: int) -> np.ndarray:
    """Mode-``mode`` matricization, shape ``(d_mode, d_* / d_mode)``."""
    t = np.asarray(t)
    _check_mode(t.ndim, mode)
    return np.reshape(np.moveaxis(t, mode, 0), (t.shape[mode], -1), order="F")


def fold(mat: np.ndarray, mode: int, dims: Sequence[int]) -> np.ndarray:
    """Inverse of :func:`unfold`."""
    dims = tuple(int(d) for d in dims)
    mat = np.asarray(mat, dtype=np.float64)
    _check_mode(len(dims), mode)
    rest = dims[:mode] + dims[mode + 1:]
    expected = (dims[mode], int(np.prod(rest, dtype=np.int64)))
    if mat.ndim != 2 or mat.shape != expected:
        raise ArgumentError(
            f"matrix of shape {mat.shape} cannot fold to {dims} at mode {mode + 1}")
    t = np.reshape(mat, (dims[mode],) + rest, order="F")
    return np.ascontiguousarray(np.moveaxis(t, 0, mode))


def mode_product(t: np.ndarray, mat: np.ndarray, mode: int) -> np.ndarray:
    """Multiply ``t`` along ``mode`` by ``mat`` (``mat.shape[1] == t.shape[mode]``)."""
    _check_mode(t.ndim, mode)
    if mat.ndim != 2 or mat.shape[1] != t.shape[mode]:
        raise ArgumentError(
            f"factor of shape {mat.shape} does not match extent {t.shape[mode]} "
            f"at mode {mode + 1}")
    out = np.tensordot(mat, t, axes=(1, mode))
    return np.ascontiguousarray(np.moveaxis(out, 0, mode))


def multilinear_multiply(t: np.ndarray, factors) -> np.ndarray:
    """Apply several mode products.

    ``factors`` is either a mapping ``{mode: matrix}`` or an iterable of
    ``(mode, matrix)`` pairs; at most one matrix per mode. Products are
    applied in order of largest size reduction first, which keeps
    intermediates small; the result does not depend on that order.
    """
    t = np.asarray(t, dtype=np.float64)
    pairs = list(factors.items()) if isinstance(factors, dict) else list(factors)
    seen = set()
    for mode, mat in pairs:
        _check_mode(t.ndim, mode)
        if mode in seen:
            raise ArgumentError(f"duplicate factor for mode {mode + 1}")
        seen.add(mode)
        mat = np.asarray(mat)
        if mat.ndim != 2 or mat.shape[1] != t.shape[mode]:
            raise ArgumentError(
                f"factor of shape {mat.shape} does not match extent "
                f"{t.shape[mode]} at mode {mode + 1}")
    pairs.sort(key=lambda p: np.asarray(p[1]).shape[0] / np.asarray(p[1]).shape[1])
    for mode, mat in pairs:
        t = mode_product(t, np.asarray(mat, dtype=np.float64), mode)
    return t


def project(t: np.ndarray, bases: Iterable[np.ndarray]) -> np.ndarray:
    """Orthogonal projection ``t x_1 U_1 U_1^T ... x_m U_m U_m^T``."""
    bases = list(bases)
    core = multilinear_multiply(t, [(k, u.T) for k, u in enumerate(bases)])
    return multilinear_multiply(core, list(enumerate(bases)))


def frobenius_norm(t) -> float:
    return float(np.linalg.norm(np.ravel(t)))


def infinity_norm(t) -> float:
    return float(np.max(np.abs(t)))


def mse(a, b) -> float:
    """Mean squared error ``||a - b||_F^2 / d_*``."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ArgumentError(f"shape mismatch: {a.shape} vs {b.shape}")
    diff = (a - b).ravel()
    return float(diff @ diff) / diff.size
