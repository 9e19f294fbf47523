"""Dense tensor arithmetic on R^{4n}.

All tensors are covariant, stored as dense ``numpy`` arrays with every axis
of length 4n.  The operations here are the small fixed vocabulary the
curvature and torsion machinery needs: slot actions of the structure
endomorphisms, the graded full action, normalized p-form and raw rank-4
inner products, symmetric and wedge products of 2-tensors, and the two
skewing maps used by the torsion-to-curvature formulas.

Conventions (fixed once and relied on everywhere):

* slot action:   ``A_(i) b(X1,...,Xi,...,Xs) = -b(X1,...,A Xi,...,Xs)``
* full action:   ``A b(X1,...,Xs) = (-1)^s b(A X1,...,A Xs)``
* p-form inner:  ``<a,b> = (1/p!) a(e_I) b(e_I)`` (sum over all index tuples)
* rank-4 inner:  raw full contraction, no normalization
* wedge of forms: shuffle alternation with unit coefficients, e.g. for
  2-forms ``(b^c)(x,y,z,u) = b(x,y)c(z,u) - b(x,z)c(y,u) + b(x,u)c(y,z)
  + c(x,y)b(z,u) - c(x,z)b(y,u) + c(x,u)b(y,z)``.  With this normalization
  ``psi(g,g) = 2 pi1`` and ``vartheta(g,g) = 4 pi2`` hold exactly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

#: Default relative tolerance for symmetry validation.
FORM_TOL = 1e-12


# ---------------------------------------------------------------------------
# Optional typed wrapper (used by file I/O and the CLI; core math works on
# plain ndarrays).

SYMMETRY_TAGS = ("none", "form", "curvature-pair", "symmetric2")


@dataclass
class DenseTensor:
    """A dense real tensor of rank 0..4 with a declared symmetry tag."""

    data: np.ndarray
    tag: str = "none"

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float)
        if self.rank > 4:
            raise ValueError(f"rank {self.rank} unsupported (max 4)")
        if self.tag not in SYMMETRY_TAGS:
            raise ValueError(f"unknown symmetry tag {self.tag!r}")
        dims = set(self.data.shape)
        if len(dims) > 1:
            raise ValueError(f"all axes must have equal length, got {self.data.shape}")

    @property
    def rank(self) -> int:
        return self.data.ndim

    @property
    def dim(self) -> int:
        return self.data.shape[0] if self.rank else 0

    def validate(self, tol: float = FORM_TOL) -> None:
        """Verify the declared symmetry to relative tolerance ``tol``."""
        scale = max(np.max(np.abs(self.data)), 1e-300)
        if self.tag == "form":
            err = np.max(np.abs(self.data - alt(self.data)))
        elif self.tag == "symmetric2":
            err = np.max(np.abs(self.data - self.data.T))
        elif self.tag == "curvature-pair":
            err = max(np.max(np.abs(self.data + self.data.swapaxes(0, 1))),
                      np.max(np.abs(self.data + self.data.swapaxes(2, 3))),
                      np.max(np.abs(self.data - self.data.transpose(2, 3, 0, 1))))
        else:
            return
        if err > tol * scale:
            raise ValueError(f"tensor violates symmetry {self.tag!r}: residual {err}")


# ---------------------------------------------------------------------------
# Slot and full actions.

def slot_act(A: np.ndarray, i: int, b: np.ndarray) -> np.ndarray:
    """Apply ``A_(i) b = -b(..., A X_i, ...)`` on the 1-based slot ``i``."""
    r = b.ndim
    if not 1 <= i <= r:
        raise ValueError(f"slot {i} out of range for rank-{r} tensor")
    # tensordot appends the substituted axis at the end; move it back
    return -np.moveaxis(np.tensordot(b, A, axes=([i - 1], [0])), -1, i - 1)


def pair_act(A: np.ndarray, i: int, j: int, b: np.ndarray) -> np.ndarray:
    """``A_(i) A_(j) b`` (signs cancel: plain substitution in slots i < j)."""
    return slot_act(A, i, slot_act(A, j, b))


def full_act(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Graded full action ``A b(X1,...,Xs) = (-1)^s b(A X1,...,A Xs)``."""
    out = b
    for i in range(1, b.ndim + 1):
        out = slot_act(A, i, out)
    return out


# ---------------------------------------------------------------------------
# Inner products.

def p_form_inner(a: np.ndarray, b: np.ndarray) -> float:
    """Normalized inner product ``(1/p!) a(e_I) b(e_I)`` of two p-forms."""
    if a.shape != b.shape:
        raise ValueError(f"rank/shape mismatch: {a.shape} vs {b.shape}")
    p = a.ndim
    return float(np.tensordot(a, b, axes=p)) / _factorial(p)


def curvature_inner(a: np.ndarray, b: np.ndarray) -> float:
    """Raw full contraction of two rank-4 tensors."""
    if a.ndim != 4 or b.ndim != 4:
        raise ValueError("curvature_inner expects rank-4 tensors")
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.tensordot(a, b, axes=4))


def frob(a: np.ndarray) -> float:
    """Frobenius norm (raw full contraction with itself, square-rooted)."""
    return float(np.sqrt(np.tensordot(a, a, axes=a.ndim)))


def _factorial(p: int) -> int:
    out = 1
    for k in range(2, p + 1):
        out *= k
    return out


# ---------------------------------------------------------------------------
# Products of 2-tensors.

def odot(b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Symmetrized outer product ``b . c = (b x c + c x b) / 2`` (rank 4)."""
    bc = np.einsum("xy,zu->xyzu", b, c)
    cb = np.einsum("xy,zu->xyzu", c, b)
    return 0.5 * (bc + cb)


def wedge2(b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Wedge of two 2-forms: the six (2,2)-shuffles with unit coefficients."""
    return (np.einsum("xy,zu->xyzu", b, c)
            - np.einsum("xz,yu->xyzu", b, c)
            + np.einsum("xu,yz->xyzu", b, c)
            + np.einsum("yz,xu->xyzu", b, c)
            - np.einsum("yu,xz->xyzu", b, c)
            + np.einsum("zu,xy->xyzu", b, c))


def wedge11(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Wedge of two 1-forms: (a^b)(x,y) = a(x)b(y) - a(y)b(x)."""
    return np.outer(a, b) - np.outer(b, a)


def wedge12(a: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Wedge of a 1-form with a 2-form, unit-coefficient shuffles:

    (a^w)(x,y,z) = a(x)w(y,z) - a(y)w(x,z) + a(z)w(x,y).
    """
    return (np.einsum("x,yz->xyz", a, w)
            - np.einsum("y,xz->xyz", a, w)
            + np.einsum("z,xy->xyz", a, w))


def theta_tensor(a: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Plain tensor product (a x w)(x,y,z) = a(x) w(y,z)."""
    return np.einsum("x,yz->xyz", a, w)


def gamma_tensor_omega(gamma: np.ndarray, omega: np.ndarray) -> np.ndarray:
    """(gamma x omega)(x,y,z,u) = gamma(x,y) omega(z,u)."""
    return np.einsum("xy,zu->xyzu", gamma, omega)


# ---------------------------------------------------------------------------
# Skewing maps.

def skew_a(T: np.ndarray) -> np.ndarray:
    """Antisymmetrize the first two slots (orthogonal projection, so tensors
    already antisymmetric there are fixed).  The curvature-from-torsion
    formulas use the unnormalized skewing ``T - T.swap`` internally, matching
    their coefficient conventions."""
    if T.ndim < 2:
        raise ValueError("skew_a needs rank >= 2")
    return 0.5 * (T - T.swapaxes(0, 1))


def b_tilde(xi: np.ndarray, zeta: np.ndarray) -> np.ndarray:
    """``b~(xi x zeta)_{X,Y} Z = xi_{zeta_X Y} Z - xi_{zeta_Y X} Z``.

    Both arguments are rank-3 tensors indexed as t[X, m, Z] = <e_m, t_X e_Z>.
    Returns the rank-4 tensor E[x, y, m, z] = <e_m, b~(xi x zeta)_{x,y} e_z>.
    """
    if xi.ndim != 3 or zeta.ndim != 3:
        raise ValueError("b_tilde expects two rank-3 tensors")
    e1 = np.einsum("xwy,wmz->xymz", zeta, xi)
    return e1 - e1.swapaxes(0, 1)


# ---------------------------------------------------------------------------
# Alternation / symmetrization helpers.

def alt(T: np.ndarray) -> np.ndarray:
    """Full antisymmetrization (orthogonal projection onto forms)."""
    r = T.ndim
    out = np.zeros_like(T)
    for perm in itertools.permutations(range(r)):
        out += _perm_sign(perm) * T.transpose(perm)
    return out / _factorial(r)


def _perm_sign(perm) -> int:
    sign = 1
    seen = [False] * len(perm)
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        k = start
        while not seen[k]:
            seen[k] = True
            k = perm[k]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def sym2(b: np.ndarray) -> np.ndarray:
    """Symmetric part of a bilinear form."""
    return 0.5 * (b + b.T)


def asym2(b: np.ndarray) -> np.ndarray:
    """Antisymmetric part of a bilinear form."""
    return 0.5 * (b - b.T)


def cyclic3(T: np.ndarray, axes=(0, 1, 2)) -> np.ndarray:
    """Cyclic sum of a tensor over three of its axes (both cycles included)."""
    i, j, k = axes

    def cycled(t):
        order = list(range(t.ndim))
        order[i], order[j], order[k] = k, i, j
        return t.transpose(order)

    t1 = cycled(T)
    return T + t1 + cycled(t1)


def sigma_perm(R: np.ndarray) -> np.ndarray:
    """The cyclic slot permutation sigma R(x,y,z,u) = R(z,x,y,u)."""
    return R.transpose(1, 2, 0, 3)


def check_form(T: np.ndarray, tol: float = FORM_TOL) -> bool:
    """True when T is fully antisymmetric to relative tolerance."""
    scale = max(frob(T), 1e-300)
    return frob(T - alt(T)) <= tol * scale
