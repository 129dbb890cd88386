"""Signal tensors from latent-variable models, plus Gaussian noise.

Every random draw goes through :func:`make_rng`, a numpy ``Generator``
on the counter-based Philox4x64 bit generator (algorithm id
``philox4x64-10``). Outputs are bit-reproducible for a given seed within
this implementation; other implementations can only be expected to match
moments.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ArgumentError
from .tensor import frobenius_norm, multilinear_multiply

RNG_ALGORITHM = "philox4x64-10"

TABLE_MODELS = ("model1", "model2", "model3")
FUNCTION_IDS = TABLE_MODELS + ("cp", "tucker", "chc")

LINKS = {
    "identity": lambda x: x,
    "logistic": lambda x: 1.0 / (1.0 + np.exp(-x)),
    "tanh": np.tanh,
    "exp": np.exp,
}


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed)))


@dataclass
class LatentModel:
    """A latent function plus the per-mode latent vectors it is evaluated at.

    ``latent_vectors`` holds one ``(d_k, s_k)`` array per mode (row ``i`` is
    the latent vector of index ``i``). For the analytic table models a
    single array may be given and is shared by all three modes. When it is
    ``None`` the vectors are drawn from the seed passed to
    :func:`generate_signal`.

    ``params`` by ``function_id``:

    * table models: ``s`` (latent dimension, used when sampling)
    * ``cp``: ``weights`` (positive, length s); ``s`` when sampling
    * ``tucker``: ``core`` with extents ``(s_1, ..., s_m)``
    * ``chc``: ``amplitude`` and ``index_sets`` (one 0-based set per mode)
    * any model: optional ``link`` in ``LINKS`` applied entrywise
    """

    function_id: str
    latent_vectors: list | np.ndarray | None = None
    params: dict = field(default_factory=dict)
    regularity: float = 1.0

    def __post_init__(self):
        if self.function_id not in FUNCTION_IDS:
            raise ArgumentError(f"unknown model {self.function_id!r}; expected one of {FUNCTION_IDS}")
        if self.regularity <= 0:
            raise ArgumentError("regularity constant M must be positive")
        link = self.params.get("link", "identity")
        if link not in LINKS:
            raise ArgumentError(f"unknown link {link!r}")
        if self.function_id == "cp" and "weights" in self.params:
            if np.any(np.asarray(self.params["weights"]) <= 0):
                raise ArgumentError("CP weights must be positive")


@dataclass(frozen=True)
class NoiseSpec:
    sigma: float
    seed: int
    kind: str = "iid-gaussian"

    def __post_init__(self):
        if self.sigma < 0:
            raise ArgumentError(f"noise sigma must be >= 0, got {self.sigma}")
        if self.kind != "iid-gaussian":
            raise ArgumentError(f"unsupported noise kind {self.kind!r}")


def sample_latents(d: int, s: int, distribution: str = "unif01", seed: int = 0) -> np.ndarray:
    """``d`` i.i.d. latent vectors of length ``s``, as a ``(d, s)`` array.

    ``unif01`` draws from ``[0, 1]^s``; ``unif-sym`` from ``[-1, 1]^s``.
    """
    if d < 1 or s < 1:
        raise ArgumentError(f"need d, s >= 1, got d={d}, s={s}")
    rng = make_rng(seed)
    if distribution == "unif01":
        return rng.random((d, s))
    if distribution == "unif-sym":
        return rng.uniform(-1.0, 1.0, (d, s))
    raise ArgumentError(f"unknown latent distribution {distribution!r}")


def _sqdist(a, b):
    return np.sum((a[:, None, :] - b[None, :, :]) ** 2, axis=-1)


def _per_mode(latents, dims):
    if isinstance(latents, np.ndarray) and latents.ndim == 2:
        latents = [latents] * len(dims)
    latents = [np.asarray(a, dtype=np.float64) for a in latents]
    if len(latents) != len(dims):
        raise ArgumentError(f"{len(latents)} latent blocks for an order-{len(dims)} tensor")
    for k, (a, d) in enumerate(zip(latents, dims)):
        if a.ndim != 2 or a.shape[0] != d:
            raise ArgumentError(f"mode {k + 1}: expected {d} latent vectors, got array of shape {a.shape}")
    return latents


def _table_signal(function_id, latents):
    x, y, z = latents
    if not x.shape[1] == y.shape[1] == z.shape[1]:
        raise ArgumentError("table models need equal latent dimension on every mode")
    dxy, dyz, dzx = _sqdist(x, y), _sqdist(y, z), _sqdist(z, x)
    s = (dxy[:, :, None] + dyz[None, :, :] + dzx.T[:, None, :]) / 3.0
    if function_id == "model1":
        return np.exp(-s)
    if function_id == "model2":
        return np.cos(s)
    return np.log1p(s)


def generate_signal(model: LatentModel, dims: Sequence[int], seed: int = 0) -> np.ndarray:
    """Evaluate ``theta[i_1..i_m] = f(a_{i_1}, ..., a_{i_m})`` on the full grid."""
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 1 for d in dims):
        raise ArgumentError(f"invalid extents {dims}")
    fid = model.function_id
    params = model.params
    latents = model.latent_vectors

    if fid in TABLE_MODELS:
        if len(dims) != 3:
            raise ArgumentError(f"{fid} is defined for order-3 tensors only")
        if latents is None:
            if len(set(dims)) != 1:
                raise ArgumentError("shared latent sampling needs equal extents on all modes")
            latents = sample_latents(dims[0], int(params.get("s", 1)), "unif01", seed)
        theta = _table_signal(fid, _per_mode(latents, dims))

    elif fid == "cp":
        if latents is None:
            s = int(params.get("s", len(params.get("weights", [1.0]))))
            latents = [sample_latents(d, s, "unif-sym", seed + k) for k, d in enumerate(dims)]
        latents = _per_mode(latents, dims)
        s = latents[0].shape[1]
        if any(a.shape[1] != s for a in latents):
            raise ArgumentError("CP factors must share one latent dimension")
        weights = np.asarray(params.get("weights", np.ones(s)), dtype=np.float64)
        if weights.shape != (s,):
            raise ArgumentError(f"expected {s} CP weights, got {weights.shape}")
        # diagonal core carrying the weights
        core = np.zeros((s,) * len(dims))
        core[(np.arange(s),) * len(dims)] = weights
        theta = multilinear_multiply(core, list(enumerate(latents)))

    elif fid == "tucker":
        core = np.asarray(params["core"], dtype=np.float64)
        if core.ndim != len(dims):
            raise ArgumentError(f"core of order {core.ndim} for an order-{len(dims)} tensor")
        if latents is None:
            latents = [sample_latents(d, s, "unif-sym", seed + k)
                       for k, (d, s) in enumerate(zip(dims, core.shape))]
        latents = _per_mode(latents, dims)
        for k, (a, s) in enumerate(zip(latents, core.shape)):
            if a.shape[1] != s:
                raise ArgumentError(f"mode {k + 1}: latent length {a.shape[1]} != core extent {s}")
        theta = multilinear_multiply(core, list(enumerate(latents)))

    else:  # chc
        amplitude = float(params["amplitude"])
        index_sets = params["index_sets"]
        if len(index_sets) != len(dims):
            raise ArgumentError(f"{len(index_sets)} index sets for an order-{len(dims)} tensor")
        theta = np.full((), amplitude)
        for k, (idx, d) in enumerate(zip(index_sets, dims)):
            ind = np.zeros(d)
            idx = sorted(set(int(i) for i in idx))
            if idx and not (0 <= idx[0] and idx[-1] < d):
                raise ArgumentError(f"mode {k + 1}: index set outside [0, {d})")
            ind[idx] = 1.0
            theta = np.multiply.outer(theta, ind)

    link = params.get("link", "identity")
    return np.ascontiguousarray(LINKS[link](np.asarray(theta, dtype=np.float64)))


def table_model(model_id: str | int, s: int, latents=None) -> LatentModel:
    """Shortcut for the analytic simulation models (``1``, ``2``, ``3``)."""
    fid = model_id if str(model_id).startswith("model") else f"model{model_id}"
    return LatentModel(fid, latents, {"s": int(s)})


def chc_model(amplitude: float, index_sets) -> LatentModel:
    return LatentModel("chc", None, {"amplitude": amplitude, "index_sets": index_sets},
                       regularity=max(abs(amplitude), 1e-300))


def tucker_model(core, factors=None) -> LatentModel:
    core = np.asarray(core, dtype=np.float64)
    m = float(np.max(np.abs(core))) if core.size else 0.0
    return LatentModel("tucker", factors, {"core": core}, regularity=max(m, 1e-300))


def random_tucker_signal(dims, ranks, seed: int = 0) -> np.ndarray:
    """Exact Tucker-rank ``ranks`` tensor: Gaussian core, orthonormal factors."""
    rng = make_rng(seed)
    core = rng.standard_normal(tuple(ranks))
    factors = [np.linalg.qr(rng.standard_normal((d, r)))[0] for d, r in zip(dims, ranks)]
    return multilinear_multiply(core, list(enumerate(factors)))


def planted_block_signal(dims, n_blocks: int, amplitudes=None, seed: int = 0):
    """Sum of CHC tensors with disjoint index blocks along the first mode.

    Block ``b`` is ``amplitude_b * 1_{I_b} o 1 o ... o 1`` with the rows of
    mode 1 split into ``n_blocks`` contiguous groups after a seeded
    shuffle. Returns ``(theta, labels)``.
    """
    dims = tuple(int(d) for d in dims)
    if not 1 <= n_blocks <= dims[0]:
        raise ArgumentError(f"cannot plant {n_blocks} blocks in {dims[0]} rows")
    if amplitudes is None:
        amplitudes = np.arange(1, n_blocks + 1, dtype=np.float64)
    rng = make_rng(seed)
    order = rng.permutation(dims[0])
    groups = np.array_split(order, n_blocks)
    labels = np.empty(dims[0], dtype=np.int64)
    theta = np.zeros(dims)
    for b, rows in enumerate(groups):
        labels[rows] = b
        sets = [rows] + [range(d) for d in dims[1:]]
        theta += generate_signal(chc_model(float(amplitudes[b]), sets), dims)
    return theta, labels


def smooth_volume(dims, n_blobs: int = 20, seed: int = 0) -> np.ndarray:
    """Synthetic smooth 3-D volume: rotated anisotropic Gaussian blobs.

    Stand-in for an image volume in denoising experiments. Rotated blobs
    are not separable, so the volume is full rank with a smoothly
    decaying Tucker spectrum.
    """
    dims = tuple(int(d) for d in dims)
    if len(dims) != 3:
        raise ArgumentError("smooth_volume builds order-3 tensors")
    rng = make_rng(seed)
    axes = [np.linspace(0.0, 1.0, d) for d in dims]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    vol = np.zeros(dims)
    for _ in range(n_blobs):
        center = rng.uniform(0.2, 0.8, 3)
        q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
        widths = rng.uniform(0.03, 0.12, 3)
        prec = q @ np.diag(1.0 / widths ** 2) @ q.T
        diff = grid - center
        vol += rng.uniform(0.5, 1.5) * np.exp(-0.5 * np.einsum("...i,ij,...j->...", diff, prec, diff))
    return vol


def add_noise(theta, noise: NoiseSpec) -> np.ndarray:
    """``theta + sigma * Z`` with ``Z`` i.i.d. standard normal from ``noise.seed``."""
    theta = np.asarray(theta, dtype=np.float64)
    if noise.sigma == 0:
        return theta.copy()
    z = make_rng(noise.seed).standard_normal(theta.shape)
    return theta + noise.sigma * z


def noise_sigma_for_level(theta, gamma: float) -> float:
    """Noise standard deviation ``gamma * rms(theta)``."""
    if gamma < 0:
        raise ArgumentError(f"noise level must be >= 0, got {gamma}")
    theta = np.asarray(theta)
    return gamma * frobenius_norm(theta) / np.sqrt(theta.size)
