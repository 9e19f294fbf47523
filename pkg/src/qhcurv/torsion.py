"""Intrinsic torsion: the space T* (x) Lambda^2_0 E S^2 H and its six classes.

A torsion tensor is stored as the rank-3 array t[x, m, z] = <e_m, xi_{e_x}
e_z>; for each fixed first slot the 2-form t(X; ., .) lies in Lambda^2_0 E
S^2 H (antisymmetric, orthogonal to the omega_A, with sum_A A-action equal
to minus itself).  Under Sp(n)Sp(1) this space splits as

    (Lambda^3_0 E + K + E)(S^3 H + H)

giving six components 33, K3, E3, 3H, KH, EH.  The S^3H/H split is cut out
by linear slot conditions; within each half the E-part is the
image of an explicit formula in the trace one-forms theta, the Lambda^3_0
part is cut out by the three-form/cyclic conditions, and the K-part is the
orthogonal remainder.

The module also recovers (xi, lambda_A) from nabla-omega first-jet data and
classifies torsion tensors by the 6-bit mask of nonvanishing components.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import curvature_space as cs
from . import tensor_ops as top
from .model_space import ModelSpace


def _es(expr, *ops):
    return np.einsum(expr, *ops, optimize=True)

#: Component order used everywhere (layout order and bit order of the mask).
TORSION_COMPONENTS = ("33", "K3", "E3", "3H", "KH", "EH")


def expected_torsion_dims(n: int) -> dict:
    """Real dimensions of the six components."""
    e = 2 * n
    l30 = max(e * (e - 1) * (e - 2) // 6 - e, 0)
    kk = e * (e * (e - 1) // 2 - 1) - l30 - e
    return {"33": 4 * l30, "K3": 4 * kk, "E3": 4 * e,
            "3H": 2 * l30, "KH": 2 * kk, "EH": 2 * e}


# ---------------------------------------------------------------------------
# Slot operators entering the characterizations.

def _sum_op13(m: ModelSpace, t: np.ndarray) -> np.ndarray:
    """sum_A t(A., ., A.)  (the action of sum_A A_(1) A_(3))."""
    return sum(_es("ax,cz,ayc->xyz", A, A, t) for A in m.triple)


def _sum_op12(m: ModelSpace, t: np.ndarray) -> np.ndarray:
    """sum_A t(A., A., .)."""
    return sum(_es("ax,by,abz->xyz", A, A, t) for A in m.triple)


def _op_h(A: np.ndarray, t: np.ndarray) -> np.ndarray:
    """t(A.,.,A.) + t(A.,A.,.) + t(.,A.,A.) for a single A."""
    return (_es("ax,cz,ayc->xyz", A, A, t)
            + _es("ax,by,abz->xyz", A, A, t)
            + _es("by,cz,xbc->xyz", A, A, t))


def cyclic_sum(t: np.ndarray) -> np.ndarray:
    """Cyclic sum over the three slots of a rank-3 tensor."""
    return top.cyclic3(t)


# ---------------------------------------------------------------------------
# Membership projector for the ambient torsion space.

def project_to_torsion_space(m: ModelSpace, t: np.ndarray) -> np.ndarray:
    """Orthogonal projection of a rank-3 tensor onto T* (x) Lambda^2_0 E S^2 H."""
    t = 0.5 * (t - t.swapaxes(1, 2))
    # per first-slot slice, remove the S^2E and span{omega} parts of the 2-form
    s2e = 0.25 * (t + sum(_es("by,cz,xbc->xyz", A, A, t) for A in m.triple))
    t = t - s2e
    for w in m.omegas:
        coef = _es("xyz,yz->x", t, w) / (4.0 * m.n)
        t = t - _es("x,yz->xyz", coef, w)
    return t


# ---------------------------------------------------------------------------
# Trace one-forms.

def _theta_scale(n: int) -> float:
    return 6.0 * (2.0 * n + 1.0) * (n - 1.0) / n


def theta(m: ModelSpace, t: np.ndarray) -> np.ndarray:
    """Global trace one-form: (6/n)(2n+1)(n-1) theta(X) = -<xi_{e_i} e_i, X>."""
    return -_es("ixi->x", t) / _theta_scale(m.n)


def theta_A(m: ModelSpace, t: np.ndarray, A: np.ndarray) -> np.ndarray:
    """Local trace one-form: (2/n)(2n+1)(n-1) theta_A(X) = -<A xi_{e_i} A e_i, X>."""
    w = _es("iab,ax,bi->x", t, A, A)
    return w / (_theta_scale(m.n) / 3.0)


def xi_E3_from_trace(m: ModelSpace, t: np.ndarray) -> np.ndarray:
    """The E S^3H component, reconstructed from the trace one-forms:

    <Y,(xi_E3)_X Z> = (1/n) sum_A (n A(theta_A - theta) ^ omega_A
                                   - (n-1) A(theta_A - theta) (x) omega_A).
    """
    th = theta(m, t)
    out = np.zeros_like(t)
    for A, w in zip(m.triple, m.omegas):
        alpha = A @ (theta_A(m, t, A) - th)
        out += top.wedge12(alpha, w) - ((m.n - 1.0) / m.n) * top.theta_tensor(alpha, w)
    return out


def xi_EH_from_trace(m: ModelSpace, t: np.ndarray) -> np.ndarray:
    """The E H component, reconstructed from the global trace one-form:

    <Y,(xi_EH)_X Z> = 3 e_i (x) e_i ^ theta
                      - sum_A (e_i (x) A e_i ^ A theta + (2/n) A theta (x) omega_A).
    """
    th = theta(m, t)
    g = m.g
    out = 3.0 * (_es("xy,z->xyz", g, th) - _es("xz,y->xyz", g, th))
    for A, w in zip(m.triple, m.omegas):
        ath = A @ th
        out -= (_es("yx,z->xyz", A, ath) - _es("zx,y->xyz", A, ath))
        out -= (2.0 / m.n) * _es("x,yz->xyz", ath, w)
    return out


# ---------------------------------------------------------------------------
# The six projectors.

@dataclass
class TorsionBank:
    """Orthonormal bases (rows, flattened rank-3) of the six components."""

    model: ModelSpace
    ambient: np.ndarray
    s3h: np.ndarray
    h: np.ndarray
    comps: dict
    log: list = field(default_factory=list)

    def rank(self, name: str) -> int:
        return self.comps[name].shape[0]

    def project(self, t: np.ndarray, name: str) -> np.ndarray:
        B = self.comps[name]
        v = t.ravel()
        return (B.T @ (B @ v)).reshape(t.shape)

    def component_norms(self, t: np.ndarray) -> dict:
        v = t.ravel()
        return {name: float(np.linalg.norm(self.comps[name] @ v))
                for name in TORSION_COMPONENTS}

    def class_mask(self, t: np.ndarray, rel_threshold: float = 1e-8) -> str:
        """6-bit class mask, one bit per nonzero component (order 33..EH)."""
        norms = self.component_norms(t)
        scale = max(np.linalg.norm(t.ravel()), 1e-300)
        return "".join("1" if norms[name] > rel_threshold * scale else "0"
                       for name in TORSION_COMPONENTS)

    def random_component(self, name: str, seed) -> np.ndarray:
        """Seeded random unit tensor in one component (zero if rank 0)."""
        B = self.comps[name]
        d = self.model.dim
        if B.shape[0] == 0:
            return np.zeros((d, d, d))
        rng = cs.substream("torsion", name, seed)
        coef = rng.standard_normal(B.shape[0])
        coef /= np.linalg.norm(coef)
        return (coef @ B).reshape(d, d, d)


def _kernel_within(rows: np.ndarray, op_mats: list) -> np.ndarray:
    """Rows spanning the joint kernel of operators restricted to span(rows)."""
    stacked = np.vstack(op_mats)
    coeff = cs.null_space_rows(stacked)
    return coeff @ rows


def _op_matrix_on_rows(rows: np.ndarray, shape, op) -> np.ndarray:
    """Column r holds op(tensor_r).ravel() for the row basis."""
    cols = [op(row.reshape(shape)).ravel() for row in rows]
    return np.array(cols).T


def build_torsion_bank(m: ModelSpace, tol: float = cs.SV_TOL) -> TorsionBank:
    """Construct the six orthogonal component bases of the torsion space."""
    d = m.dim
    shape = (d, d, d)
    log = []

    # ambient space basis
    eye = np.eye(d ** 3)
    proj_rows = np.empty((d ** 3, d ** 3))
    for k in range(d ** 3):
        proj_rows[k] = project_to_torsion_space(m, eye[k].reshape(shape)).ravel()
    ambient = cs.orthonormal_rows(proj_rows, tol, floor=1e-6)
    log.append(f"ambient torsion space: dim {ambient.shape[0]}")

    # S^3H / H halves
    m13 = _op_matrix_on_rows(ambient, shape, lambda t: _sum_op13(m, t) + t)
    m12 = _op_matrix_on_rows(ambient, shape, lambda t: _sum_op12(m, t) + t)
    s3h = _kernel_within(ambient, [m13, m12])
    h_mats = [_op_matrix_on_rows(ambient, shape, lambda t, A=A: _op_h(A, t) - t)
              for A in m.triple]
    h = _kernel_within(ambient, h_mats)
    log.append(f"S3H half: dim {s3h.shape[0]}; H half: dim {h.shape[0]}")

    comps = {}

    # Lambda^3_0 E S^3H: totally skew tensors inside the S^3H half
    skew_mat = _op_matrix_on_rows(s3h, shape, lambda t: t - top.alt(t))
    comps["33"] = _kernel_within(s3h, [skew_mat])

    # E S^3H: image of the trace-form reconstruction
    e3_rows = np.array([xi_E3_from_trace(m, row.reshape(shape)).ravel()
                        for row in s3h])
    comps["E3"] = cs.orthonormal_rows(e3_rows, tol, floor=1e-6)

    # K S^3H: orthogonal remainder
    used = np.vstack([comps["33"], comps["E3"]]) if comps["33"].shape[0] \
        else comps["E3"]
    comps["K3"] = cs.orthonormal_rows(
        s3h - (s3h @ used.T) @ used, tol, floor=1e-6)

    # Lambda^3_0 E H: vanishing cyclic sum inside the H half
    cyc_mat = _op_matrix_on_rows(h, shape, cyclic_sum)
    comps["3H"] = _kernel_within(h, [cyc_mat])

    # E H: image of the global-trace reconstruction
    eh_rows = np.array([xi_EH_from_trace(m, row.reshape(shape)).ravel()
                        for row in h])
    comps["EH"] = cs.orthonormal_rows(eh_rows, tol, floor=1e-6)

    # K H: orthogonal remainder
    used = np.vstack([comps["3H"], comps["EH"]]) if comps["3H"].shape[0] \
        else comps["EH"]
    comps["KH"] = cs.orthonormal_rows(
        h - (h @ used.T) @ used, tol, floor=1e-6)

    for name in TORSION_COMPONENTS:
        log.append(f"xi_{name}: rank {comps[name].shape[0]}")
    return TorsionBank(model=m, ambient=ambient, s3h=s3h, h=h,
                       comps=comps, log=log)


# ---------------------------------------------------------------------------
# Characterization predicates (verified on the projector images by tests).

def residual_s3h_conditions(m: ModelSpace, t: np.ndarray) -> float:
    return max(top.frob(_sum_op13(m, t) + t), top.frob(_sum_op12(m, t) + t))


def residual_h_conditions(m: ModelSpace, t: np.ndarray) -> float:
    return max(top.frob(_op_h(A, t) - t) for A in m.triple)


def residual_skew(t: np.ndarray) -> float:
    return top.frob(t - top.alt(t))


def residual_cyclic(t: np.ndarray) -> float:
    return top.frob(cyclic_sum(t))


def residual_trace_free(t: np.ndarray) -> float:
    """|sum_i xi_{e_i} e_i| (the K H class is trace-free)."""
    return float(np.linalg.norm(_es("ixi->x", t)))


def psi_k_solve(m: ModelSpace, t: np.ndarray):
    """Solve <Y,(xi)_X Z> = (3 psi - sum_A A_(23) psi)(X,Y,Z) for a 3-form psi.

    Returns (psi, relative residual).  The K H class is exactly the set of
    H-type tensors admitting such a representation.
    """
    d = m.dim
    import itertools as it
    triples = list(it.combinations(range(d), 3))
    cols = []
    for (i, j, k) in triples:
        e = np.zeros((d, d, d))
        for perm, sgn in (((i, j, k), 1), ((j, k, i), 1), ((k, i, j), 1),
                          ((j, i, k), -1), ((i, k, j), -1), ((k, j, i), -1)):
            e[perm] = sgn
        img = 3.0 * e - sum(_es("by,cz,xbc->xyz", A, A, e) for A in m.triple)
        cols.append(img.ravel())
    mat = np.array(cols).T
    coef, *_ = np.linalg.lstsq(mat, t.ravel(), rcond=None)
    resid = np.linalg.norm(mat @ coef - t.ravel()) / max(np.linalg.norm(t.ravel()), 1e-300)
    psi = np.zeros((d, d, d))
    for c, (i, j, k) in zip(coef, triples):
        for perm, sgn in (((i, j, k), 1), ((j, k, i), 1), ((k, i, j), 1),
                          ((j, i, k), -1), ((i, k, j), -1), ((k, j, i), -1)):
            psi[perm] += sgn * c
    return psi, float(resid)


# ---------------------------------------------------------------------------
# Recovery from nabla-omega data.

def nabla_omega_from_torsion(m: ModelSpace, t: np.ndarray,
                             lambdas: np.ndarray) -> np.ndarray:
    """Synthesize (nabla omega_I, nabla omega_J, nabla omega_K) from (xi, lambda):

    (nabla_X omega_I)(Y,Z) = lambda_K(X) omega_J(Y,Z) - lambda_J(X) omega_K(Y,Z)
                             - <Y, xi_X I Z> + <Y, I xi_X Z>,
    and cyclically.  ``lambdas`` has shape (3, dim) in the order I, J, K.
    """
    out = np.empty((3, m.dim, m.dim, m.dim))
    for a in range(3):
        A = m.omegas[a]
        b, c = (a + 1) % 3, (a + 2) % 3
        wb, wc = m.omegas[b], m.omegas[c]
        out[a] = (_es("x,yz->xyz", lambdas[c], wb)
                  - _es("x,yz->xyz", lambdas[b], wc)
                  - _es("xyc,cz->xyz", t, m.triple[a])
                  - _es("by,xbz->xyz", m.triple[a], t))
    return out


def torsion_from_nabla_omega(m: ModelSpace, nw_I, nw_J, nw_K,
                             tol: float = 1e-10):
    """Recover (xi, lambda_A) from first-jet data and report the residual.

    lambda_I(X) = (1/2n) <nabla_X omega_J, omega_K> and cyclically; then
    xi_X = -(1/4) sum_A A (nabla_X A) + (1/2) sum_A lambda_A(X) A.  The
    residual is the worst reconstruction error of the structure equation
    over A = I, J, K, relative to the input scale; above ``tol`` the input
    is not realizable as nabla-omega of any almost quaternion-Hermitian jet
    (reported, never silently fixed).
    """
    nws = np.stack([np.asarray(w, dtype=float) for w in (nw_I, nw_J, nw_K)])
    for a in range(3):
        if top.frob(nws[a] + nws[a].swapaxes(1, 2)) > 1e-12 * max(top.frob(nws[a]), 1):
            raise ValueError("nabla-omega inputs must be antisymmetric in (Y, Z)")
    n = m.n
    lambdas = np.empty((3, m.dim))
    for a in range(3):
        b, c = (a + 1) % 3, (a + 2) % 3
        lambdas[a] = _es("xyz,yz->x", nws[b], m.omegas[c]) / (4.0 * n)
    t = np.zeros((m.dim,) * 3)
    for a, A in enumerate(m.triple):
        t += -0.25 * _es("ma,xaz->xmz", A, nws[a]) \
             + 0.5 * _es("x,mz->xmz", lambdas[a], A)
    recon = nabla_omega_from_torsion(m, t, lambdas)
    scale = max(top.frob(nws), 1e-300)
    residual = float(top.frob(recon - nws) / scale)
    return t, lambdas, residual


# ---------------------------------------------------------------------------
# Second-factor split of a torsion derivative.

def split_torsion_derivative(bank: TorsionBank, D: np.ndarray) -> dict:
    """Project D(W; ., ., .) onto each component for every W; returns the
    component tensors keyed by name."""
    d = bank.model.dim
    flat = D.reshape(d, d ** 3)
    out = {}
    for name in TORSION_COMPONENTS:
        B = bank.comps[name]
        out[name] = ((flat @ B.T) @ B).reshape(D.shape)
    return out


def project_derivative_component(bank: TorsionBank, D: np.ndarray,
                                 name: str) -> np.ndarray:
    """Second-factor projection of a torsion derivative onto one component."""
    d = bank.model.dim
    flat = D.reshape(d, d ** 3)
    B = bank.comps[name]
    return ((flat @ B.T) @ B).reshape(D.shape)


def random_derivative_component(bank: TorsionBank, name: str, seed) -> np.ndarray:
    """Seeded random derivative with second factor in one component."""
    d = bank.model.dim
    B = bank.comps[name]
    if B.shape[0] == 0:
        return np.zeros((d, d, d, d))
    rng = cs.substream("torsion_derivative", name, seed)
    coef = rng.standard_normal((d, B.shape[0]))
    coef /= np.linalg.norm(coef)
    return (coef @ B).reshape(d, d, d, d)
