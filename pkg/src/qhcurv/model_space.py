"""Quaternion-Hermitian model vector space R^{4n}.

Builds the flat model space carrying the standard Euclidean metric and a
compatible quaternionic triple I, J, K, together with the derived structure
tensors: the three fundamental 2-forms omega_A(x, y) = <x, A y>, the
fundamental 4-form Omega = sum_A omega_A ^ omega_A, and the two canonical
curvature-type tensors pi1 (constant curvature) and pi2 (quaternionic type).

Basis convention: coordinates are grouped into n quaternionic blocks
(e_{4a+1}, ..., e_{4a+4}) on which I, J, K act as left multiplication by
i, j, k on (1, i, j, k).  This makes K = I J hold exactly in integer
arithmetic.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import tensor_ops as top

#: Hard cap on rank-4 tensor size (dim**4 entries) unless explicitly lifted.
DEFAULT_ENTRY_CAP = 2 ** 24

#: Absolute tolerance used to validate structure invariants at build time.
BUILD_TOL = 1e-12

# Left multiplication by i, j, k on one quaternionic block (1, i, j, k).
_LI = np.array([[0, -1, 0, 0],
                [1, 0, 0, 0],
                [0, 0, 0, -1],
                [0, 0, 1, 0]], dtype=float)
_LJ = np.array([[0, 0, -1, 0],
                [0, 0, 0, 1],
                [1, 0, 0, 0],
                [0, -1, 0, 0]], dtype=float)
_LK = np.array([[0, 0, 0, -1],
                [0, 0, -1, 0],
                [0, 1, 0, 0],
                [1, 0, 0, 0]], dtype=float)


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ModelSpace:
    """Immutable model space; safe to share read-only between workers.

    Attributes
    ----------
    n : int
        Quaternionic dimension (>= 2).
    dim : int
        Real dimension, 4 * n.
    g : (dim, dim) ndarray
        Gram matrix of the metric (identity in the chosen basis).
    I, J, K : (dim, dim) ndarray
        Orthogonal almost complex structures with I@I = J@J = -1 and
        K = I@J = -J@I.
    omegas : (3, dim, dim) ndarray
        Matrices of the 2-forms omega_A(x, y) = <x, A y> for A = I, J, K;
        numerically these coincide with the matrices I, J, K.
    Omega : (dim,)*4 ndarray
        Fundamental 4-form sum_A omega_A ^ omega_A.
    pi1, pi2 : (dim,)*4 ndarray
        Canonical curvature tensors; pi1(x,y,z,u) = <x,z><y,u> - <x,u><y,z>
        and pi2 = sum_A (6 omega_A . omega_A - omega_A ^ omega_A).
    """

    n: int
    dim: int
    g: np.ndarray
    I: np.ndarray
    J: np.ndarray
    K: np.ndarray
    omegas: np.ndarray
    Omega: np.ndarray
    pi1: np.ndarray
    pi2: np.ndarray

    @property
    def triple(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """The structure triple (I, J, K)."""
        return (self.I, self.J, self.K)

    def __repr__(self) -> str:  # keep reprs short; arrays are large
        return f"ModelSpace(n={self.n}, dim={self.dim})"


def structure_triple(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Block-diagonal matrices of I, J, K for quaternionic dimension n."""
    eye_n = np.eye(n)
    return tuple(np.kron(eye_n, blk) for blk in (_LI, _LJ, _LK))


def pi1_tensor(g: np.ndarray) -> np.ndarray:
    """pi1(x,y,z,u) = <x,z><y,u> - <x,u><y,z>."""
    return (np.einsum("xz,yu->xyzu", g, g)
            - np.einsum("xu,yz->xyzu", g, g))


def pi2_tensor(omegas: np.ndarray) -> np.ndarray:
    """pi2 = sum_A (6 omega_A . omega_A - omega_A ^ omega_A)."""
    out = 0.0
    for w in omegas:
        out = out + 6.0 * top.odot(w, w) - top.wedge2(w, w)
    return out


def fundamental_four_form(omegas: np.ndarray) -> np.ndarray:
    """Omega = sum_A omega_A ^ omega_A."""
    out = 0.0
    for w in omegas:
        out = out + top.wedge2(w, w)
    return out


def build_model(n: int, entry_cap: int = DEFAULT_ENTRY_CAP,
                allow_large: bool = False) -> ModelSpace:
    """Construct the model space for quaternionic dimension n >= 2.

    Raises
    ------
    ValueError
        If n < 2, or if dim**4 exceeds ``entry_cap`` and ``allow_large``
        is not set.
    """
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise ValueError(f"quaternionic dimension must be an integer >= 2, got {n!r}")
    dim = 4 * n
    if dim ** 4 > entry_cap and not allow_large:
        raise ValueError(
            f"dim**4 = {dim ** 4} exceeds the memory cap {entry_cap}; "
            "pass allow_large=True to override")
    g = np.eye(dim)
    I, J, K = structure_triple(n)
    omegas = np.stack([I, J, K]).copy()
    Omega = fundamental_four_form(omegas)
    pi1 = pi1_tensor(g)
    pi2 = pi2_tensor(omegas)

    m = ModelSpace(n=int(n), dim=dim, g=_freeze(g), I=_freeze(I),
                   J=_freeze(J), K=_freeze(K), omegas=_freeze(omegas),
                   Omega=_freeze(Omega), pi1=_freeze(pi1), pi2=_freeze(pi2))
    _validate(m)
    return m


def _validate(m: ModelSpace) -> None:
    """Check the structure invariants to BUILD_TOL; raise on violation."""
    I, J, K = m.triple
    eye = np.eye(m.dim)
    checks = {
        "I^2 = -1": I @ I + eye,
        "J^2 = -1": J @ J + eye,
        "K = IJ": K - I @ J,
        "K = -JI": K + J @ I,
        "I orthogonal": I.T @ I - eye,
        "J orthogonal": J.T @ J - eye,
        "K orthogonal": K.T @ K - eye,
    }
    for A, name in zip(m.triple, "IJK"):
        checks[f"omega_{name} antisymmetric"] = A + A.T
    for name, resid in checks.items():
        err = np.max(np.abs(resid))
        if err > BUILD_TOL:
            raise AssertionError(f"model-space invariant '{name}' fails: {err}")


def adapted_basis(m: ModelSpace, rot: np.ndarray,
                  tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Rotate the structure triple by ``rot`` in SO(3).

    Each returned A' = a I + b J + c K with (a, b, c) the rows of ``rot``;
    the new triple satisfies the quaternion identities.

    Raises
    ------
    ValueError
        If ``rot`` is not special orthogonal to ``tol``.
    """
    rot = np.asarray(rot, dtype=float)
    if rot.shape != (3, 3):
        raise ValueError(f"rotation must be 3x3, got shape {rot.shape}")
    if np.max(np.abs(rot.T @ rot - np.eye(3))) > tol:
        raise ValueError("rotation is not orthogonal")
    if np.linalg.det(rot) < 0:
        raise ValueError("rotation reverses orientation (det < 0)")
    I, J, K = m.triple
    return tuple(r[0] * I + r[1] * J + r[2] * K for r in rot)


def omegas_from_triple(triple) -> np.ndarray:
    """Stack the 2-form matrices of an adapted triple (they equal the matrices)."""
    return np.stack([np.asarray(A, dtype=float) for A in triple])


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """A uniform random element of SO(3) (QR of a Gaussian matrix)."""
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q = q @ np.diag(np.sign(np.diag(r)))
    if np.linalg.det(q) < 0:
        q[:, [0, 1]] = q[:, [1, 0]]
    return q


def orientation_volume(m: ModelSpace) -> float:
    """Evaluate Omega^n(e_1, ..., e_{4n}); nonzero, so Omega fixes an orientation.

    Computed recursively over 4-element subsets so no rank-4n array is formed.
    """
    dim, n = m.dim, m.n
    idx_all = tuple(range(dim))

    def sub_sign(subset, rest_before):
        # sign of the shuffle moving `subset` to the front of `rest_before`
        sign = 1
        positions = [rest_before.index(s) for s in subset]
        for k, p in enumerate(positions):
            sign *= (-1) ** (p - k)
        return sign

    Omega = m.Omega

    @functools.lru_cache(maxsize=None)
    def value(rest: tuple) -> float:
        if not rest:
            return 1.0
        total = 0.0
        first = rest[0]
        for tail in itertools.combinations(rest[1:], 3):
            subset = (first,) + tail
            sign = sub_sign(subset, list(rest))
            remaining = tuple(x for x in rest if x not in subset)
            w = Omega[subset]
            if w != 0.0:
                total += sign * w * value(remaining)
        return total

    # the (4,...,4)-shuffle sum counts each unordered partition n! times
    return value(idx_all) * math.factorial(n)
