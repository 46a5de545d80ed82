"""Normalization, whitening and projection solvers for the alignment pipeline.

All linear algebra here runs in float64 regardless of the storage dtype of
the embedding files.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .embeddings import EmbeddingSpace

DEFAULT_WHITEN_EPS = 1e-9  # floor for singular values inside the whitening inverse


def normalize_rows(matrix: np.ndarray) -> tuple[np.ndarray, int]:
    """Scale every row to unit Euclidean norm; zero rows are left alone.

    Returns the normalized matrix and the number of zero rows encountered.
    """
    m = np.asarray(matrix, dtype=np.float64)
    norms = np.linalg.norm(m, axis=1)
    zero = norms == 0.0
    safe = np.where(zero, 1.0, norms)
    return m / safe[:, None], int(zero.sum())


def length_normalize(space: EmbeddingSpace) -> EmbeddingSpace:
    """Unit-length normalization only (the partial preprocessing variant)."""
    out, zeros = normalize_rows(space.vectors)
    if zeros:
        warnings.warn(f"{zeros} zero row(s) left unnormalized", stacklevel=2)
    return EmbeddingSpace(list(space.words), out)


def s1_normalize(space: EmbeddingSpace) -> EmbeddingSpace:
    """Full preprocessing: unit length, mean center per dimension, unit length again.

    Rows that become zero at either normalization stage stay zero and are
    counted in a single warning.
    """
    out, zeros1 = normalize_rows(space.vectors)
    out = out - out.mean(axis=0)
    out, zeros2 = normalize_rows(out)
    zeros = max(zeros1, zeros2)
    if zeros:
        warnings.warn(f"{zeros} zero row(s) left unnormalized", stacklevel=2)
    return EmbeddingSpace(list(space.words), out)


@dataclass
class WhiteningTransform:
    """A symmetric decorrelating map T with its clamped inverse.

    For the matrix A it was computed from, (A @ T).T @ (A @ T) is the
    identity on the row space of A. When A is rank deficient, T only
    covers that row space (positive semidefinite); directions outside it
    are annihilated rather than amplified by 1/eps.
    """

    matrix: np.ndarray
    regularizer: float
    inverse: np.ndarray = field(repr=False)


def whitening_transform(A: np.ndarray, eps: float = DEFAULT_WHITEN_EPS) -> WhiteningTransform:
    """ZCA-style whitening operator from the thin SVD of A.

    T = V diag(1/max(s_i, eps)) V^T. Near-zero singular values are clamped
    to eps; an all-zero A degenerates to the identity map (with a warning)
    instead of blowing up to 1/eps.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    A = np.asarray(A, dtype=np.float64)
    _, s, vt = np.linalg.svd(A, full_matrices=False)
    if not s.size or s[0] == 0.0:
        warnings.warn("whitening a zero matrix; using identity", stacklevel=2)
        d = A.shape[1]
        return WhiteningTransform(np.eye(d), eps, np.eye(d))
    clamped = np.maximum(s, eps)
    v = vt.T
    t = (v / clamped) @ vt
    t_inv = (v * clamped) @ vt
    return WhiteningTransform(t, eps, t_inv)


@dataclass
class ProjectionModel:
    """Learned maps taking both monolingual spaces into the shared space.

    mode="orthogonal": plain rotations W_x, W_z from the dictionary SVD.
    mode="full": whiten, rotate, re-weight by singular values and de-whiten;
    the composed maps are exposed through map_source / map_target.
    """

    mode: str
    W_x: np.ndarray
    W_z: np.ndarray
    whitening_x: WhiteningTransform | None = None
    whitening_z: WhiteningTransform | None = None
    dewhiten_x: np.ndarray | None = None
    dewhiten_z: np.ndarray | None = None
    singular_values: np.ndarray | None = None
    reweight: float = 0.0

    def _map(self, M, whitening, W, dewhiten):
        out = np.asarray(M, dtype=np.float64)
        if self.mode == "orthogonal":
            return out @ W
        out = out @ whitening.matrix @ W
        if self.reweight:
            out = out * self.singular_values**self.reweight
        return out @ dewhiten

    def map_source(self, M: np.ndarray) -> np.ndarray:
        return self._map(M, self.whitening_x, self.W_x, self.dewhiten_x)

    def map_target(self, M: np.ndarray) -> np.ndarray:
        return self._map(M, self.whitening_z, self.W_z, self.dewhiten_z)


def _aligned_rows(X, Z, dictionary):
    src, tgt = dictionary.as_arrays()
    return X[src], Z[tgt]


def _signed_svd(C):
    """Thin SVD with a deterministic sign convention.

    The largest-magnitude entry of each left singular vector is made
    non-negative; the same flips are applied to the right factor so the
    product U S V^T is unchanged.
    """
    u, s, vt = np.linalg.svd(C, full_matrices=False)
    v = vt.T
    picks = np.abs(u).argmax(axis=0)
    flips = np.sign(u[picks, np.arange(u.shape[1])])
    flips[flips == 0] = 1.0
    return u * flips, s, v * flips


def solve_orthogonal(X: np.ndarray, Z: np.ndarray, dictionary) -> ProjectionModel:
    """Closed-form orthogonal alignment from the dictionary cross-covariance.

    W_x = U and W_z = V where U S V^T is the SVD of X_D^T Z_D; this
    maximizes the summed alignment score over all orthogonal pairs.
    """
    if len(dictionary) == 0:
        raise ValueError("cannot solve a projection from an empty dictionary")
    xd, zd = _aligned_rows(np.asarray(X, dtype=np.float64), np.asarray(Z, dtype=np.float64), dictionary)
    u, _, v = _signed_svd(xd.T @ zd)
    return ProjectionModel(mode="orthogonal", W_x=u, W_z=v)


def full_projection_step(
    X: np.ndarray,
    Z: np.ndarray,
    dictionary,
    eps: float = DEFAULT_WHITEN_EPS,
    whiten: bool = True,
    reweight: float = 0.5,
) -> ProjectionModel:
    """One whiten / rotate / re-weight / de-whiten projection solve.

    Whitening operators are fitted on the dictionary-aligned rows only and
    applied to the whole matrices; the rotation comes from the SVD of the
    whitened dictionary cross-covariance; both sides are re-weighted by
    S**reweight and then de-whitened through W^T T^-1 W. `whiten=False`
    and `reweight=0.0` reduce the step to the plain orthogonal solve.
    """
    if len(dictionary) == 0:
        raise ValueError("cannot solve a projection from an empty dictionary")
    X = np.asarray(X, dtype=np.float64)
    Z = np.asarray(Z, dtype=np.float64)
    d = X.shape[1]
    xd, zd = _aligned_rows(X, Z, dictionary)
    if whiten:
        wt_x = whitening_transform(xd, eps)
        wt_z = whitening_transform(zd, eps)
    else:
        ident = WhiteningTransform(np.eye(d), eps, np.eye(d))
        wt_x = wt_z = ident
    xd_w = xd @ wt_x.matrix
    zd_w = zd @ wt_z.matrix
    u, s, v = _signed_svd(xd_w.T @ zd_w)
    return ProjectionModel(
        mode="full",
        W_x=u,
        W_z=v,
        whitening_x=wt_x,
        whitening_z=wt_z,
        dewhiten_x=u.T @ wt_x.inverse @ u,
        dewhiten_z=v.T @ wt_z.inverse @ v,
        singular_values=s,
        reweight=reweight,
    )
