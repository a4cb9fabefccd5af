"""Non-local attention block with analytic forward and backward passes.

Flattening a (H, W, C) feature map into columns x_1..x_N (row-major,
N = H*W), the block computes

    theta = W_theta X,  phi = W_phi X,  g = W_g X      (each C/2 x N)
    S     = softmax_rows(theta^T phi)                  (N x N)
    y_i   = sum_j S[i, j] g[:, j]
    out   = W_B y + X, reshaped back to (H, W, C)

so every position aggregates all others weighted by pairwise affinity,
added residually to the input. The row-wise softmax normalizes each
position's outgoing attention; W_B restores the channel count, and
W_B = 0 makes the block an exact identity.

Reductions over the position axis (the softmax denominator and the
attention-weighted sum) accumulate in sorted order, which makes the
forward pass bitwise equivariant under spatial permutations of the
input: reordering positions reorders the output identically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .grid import FeatureMap
from .lighting import rng_from_seed


@dataclass(frozen=True)
class AffinityWeights:
    """The four projection matrices of the block for channel count C.

    w_theta, w_phi, w_g are (C/2, C); w_b is (C, C/2). C must be even.
    """

    w_theta: np.ndarray
    w_phi: np.ndarray
    w_g: np.ndarray
    w_b: np.ndarray

    def __post_init__(self):
        mats = {}
        for name in ("w_theta", "w_phi", "w_g", "w_b"):
            arr = np.array(getattr(self, name), dtype=np.float64, order="C")
            if arr.ndim != 2:
                raise DimensionError(f"{name} must be a matrix, got shape {arr.shape}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} entries must be finite")
            arr.setflags(write=False)
            mats[name] = arr
        half, c = mats["w_theta"].shape
        if c != 2 * half:
            raise DimensionError(
                f"w_theta must be (C/2, C) with C even, got {mats['w_theta'].shape}"
            )
        for name in ("w_phi", "w_g"):
            if mats[name].shape != (half, c):
                raise DimensionError(f"{name} must have shape ({half}, {c})")
        if mats["w_b"].shape != (c, half):
            raise DimensionError(f"w_b must have shape ({c}, {half})")
        for name, arr in mats.items():
            object.__setattr__(self, name, arr)

    @property
    def channels(self) -> int:
        return self.w_theta.shape[1]

    @classmethod
    def random(cls, channels: int, seed: int, scale: float = 0.5) -> "AffinityWeights":
        """Gaussian-initialized weights for tests and gradient checking."""
        if channels % 2 != 0 or channels < 2:
            raise DimensionError(f"channels must be even and >= 2, got {channels}")
        rng = rng_from_seed(seed)
        half = channels // 2
        return cls(
            w_theta=rng.normal(scale=scale, size=(half, channels)),
            w_phi=rng.normal(scale=scale, size=(half, channels)),
            w_g=rng.normal(scale=scale, size=(half, channels)),
            w_b=rng.normal(scale=scale, size=(channels, half)),
        )

    @classmethod
    def zeros(cls, channels: int) -> "AffinityWeights":
        if channels % 2 != 0 or channels < 2:
            raise DimensionError(f"channels must be even and >= 2, got {channels}")
        half = channels // 2
        return cls(
            w_theta=np.zeros((half, channels)),
            w_phi=np.zeros((half, channels)),
            w_g=np.zeros((half, channels)),
            w_b=np.zeros((channels, half)),
        )


@dataclass(frozen=True)
class NlCache:
    """Forward-pass intermediates consumed by nl_backward.

    attention rows each sum to 1 within 1e-6.
    """

    x_flat: np.ndarray        # C x N input columns
    theta: np.ndarray         # C/2 x N
    phi: np.ndarray           # C/2 x N
    g: np.ndarray             # C/2 x N
    attention: np.ndarray     # N x N, row-stochastic
    y: np.ndarray             # C/2 x N aggregated features
    shape: tuple              # (H, W, C) of the input
    weights: AffinityWeights

    def __post_init__(self):
        sums = self.attention.sum(axis=1)
        if np.abs(sums - 1.0).max() > 1e-6:
            raise ValueError("attention rows must sum to 1 within 1e-6")


def softmax_rows(m: np.ndarray) -> np.ndarray:
    """Row-wise softmax, stabilized by subtracting each row's maximum.

    The denominator sums the exponentials in sorted order so the result
    is unchanged (bitwise) under any permutation of a row's entries.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise DimensionError(f"expected a matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("softmax input must be finite")
    shifted = m - m.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    denom = np.sort(e, axis=1).sum(axis=1, keepdims=True)
    return e / denom


def _flatten(fm: FeatureMap) -> np.ndarray:
    h, w, c = fm.data.shape
    return fm.data.reshape(h * w, c).T.copy()


def nl_forward(b: FeatureMap, weights: AffinityWeights
               ) -> tuple[FeatureMap, NlCache]:
    """Forward pass; output shape equals the input shape."""
    if b.channels != weights.channels:
        raise DimensionError(
            f"feature map has {b.channels} channels but weights expect "
            f"{weights.channels}"
        )
    h, w, c = b.data.shape
    n = h * w
    x = _flatten(b)
    theta = weights.w_theta @ x
    phi = weights.w_phi @ x
    g = weights.w_g @ x
    attention = softmax_rows(theta.T @ phi)
    # y_i = sum_j S[i, j] g[:, j]; sorted accumulation over j keeps the
    # reduction independent of position order
    products = attention[:, :, None] * g.T[None, :, :]     # N x N x C/2
    y = np.sort(products, axis=1).sum(axis=1).T            # C/2 x N
    out = weights.w_b @ y + x
    cache = NlCache(x_flat=x, theta=theta, phi=phi, g=g, attention=attention,
                    y=y, shape=(h, w, c), weights=weights)
    return FeatureMap(out.T.reshape(h, w, c)), cache


def nl_backward(cache: NlCache, grad_out: FeatureMap
                ) -> tuple[FeatureMap, AffinityWeights]:
    """Exact gradients of a scalar loss through the block.

    grad_out carries dL/d(output); returns dL/d(input) and an
    AffinityWeights whose fields hold dL/d(each projection matrix),
    including the softmax Jacobian term.
    """
    h, w, c = cache.shape
    if grad_out.data.shape != (h, w, c):
        raise DimensionError(
            f"grad_out shape {grad_out.data.shape} does not match cached "
            f"input shape {(h, w, c)}"
        )
    wts = cache.weights
    s = cache.attention
    d_out = grad_out.data.reshape(h * w, c).T              # C x N
    d_wb = d_out @ cache.y.T
    d_y = wts.w_b.T @ d_out                                # C/2 x N
    d_g = d_y @ s                                          # C/2 x N
    d_s = d_y.T @ cache.g                                  # N x N
    # softmax Jacobian, row-wise: dM = S * (dS - <dS, S>_row)
    d_m = s * (d_s - (d_s * s).sum(axis=1, keepdims=True))
    d_theta = cache.phi @ d_m.T
    d_phi = cache.theta @ d_m
    d_w_theta = d_theta @ cache.x_flat.T
    d_w_phi = d_phi @ cache.x_flat.T
    d_w_g = d_g @ cache.x_flat.T
    d_x = (d_out + wts.w_theta.T @ d_theta + wts.w_phi.T @ d_phi
           + wts.w_g.T @ d_g)
    grad_b = FeatureMap(d_x.T.reshape(h, w, c))
    grad_w = AffinityWeights(w_theta=d_w_theta, w_phi=d_w_phi,
                             w_g=d_w_g, w_b=d_wb)
    return grad_b, grad_w


def gradient_check(channels: int = 4, size: int = 4, seed: int = 0,
                   step: float = 1e-4) -> float:
    """Compare nl_backward against central finite differences.

    Builds one random instance, differentiates L = sum(out * G) for a
    fixed random G, and returns the worst guarded relative error
    |analytic - numeric| / max(|analytic|, |numeric|, 1) over every
    entry of the input and all four weight matrices.
    """
    rng = rng_from_seed(seed)
    b_data = rng.normal(size=(size, size, channels))
    weights = AffinityWeights.random(channels, seed=seed + 1)
    g_data = rng.normal(size=(size, size, channels))

    def loss(b_arr, w):
        out, _ = nl_forward(FeatureMap(b_arr), w)
        return float((out.data * g_data).sum())

    out, cache = nl_forward(FeatureMap(b_data), weights)
    grad_b, grad_w = nl_backward(cache, FeatureMap(g_data))

    worst = 0.0

    def check_block(base: np.ndarray, analytic: np.ndarray, rebuild) -> float:
        err = 0.0
        flat = base.ravel()
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            up = loss(*rebuild(base))
            flat[i] = orig - step
            down = loss(*rebuild(base))
            flat[i] = orig
            numeric = (up - down) / (2.0 * step)
            a = analytic.ravel()[i]
            err = max(err, abs(a - numeric) / max(abs(a), abs(numeric), 1.0))
        return err

    worst = max(worst, check_block(b_data, grad_b.data,
                                   lambda arr: (arr, weights)))
    mats = {name: np.array(getattr(weights, name)) for name in
            ("w_theta", "w_phi", "w_g", "w_b")}

    def rebuild_weights(_):
        return b_data, AffinityWeights(**mats)

    for name in mats:
        worst = max(worst, check_block(mats[name],
                                       getattr(grad_w, name),
                                       rebuild_weights))
    return worst
