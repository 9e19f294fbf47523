import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qhcurv import curvature_space as cs
from qhcurv import decomposition as dec
from qhcurv import tensor_ops as top
from qhcurv.model_space import build_model

M2 = build_model(2)


def rand(shape, seed):
    return cs.substream("tops", shape, seed).standard_normal(shape)


# --- slot and full actions -------------------------------------------------

def test_slot_act_definition_elementwise():
    b = rand((8, 8, 8), 3)
    out = top.slot_act(M2.J, 2, b)
    # A_(2) b(x, y, z) = -b(x, Ay, z)
    for idx in [(0, 1, 2), (3, 3, 3), (7, 0, 5)]:
        x, y, z = idx
        expect = -sum(M2.J[a, y] * b[x, a, z] for a in range(8))
        assert out[idx] == pytest.approx(expect)


def test_slot_act_examples():
    # I_(1) omega_I(x, y) = -omega_I(Ix, y) = -<Ix, Iy> = -<x, y>
    assert np.allclose(top.slot_act(M2.I, 1, M2.I), -M2.g)
    # twice with the same A and slot is minus the identity
    b = rand((8, 8), 0)
    assert np.allclose(top.slot_act(M2.I, 1, top.slot_act(M2.I, 1, b)), -b)
    # I_(1) g (x,y) = -g(Ix,y) = -omega_I(y,x)
    assert np.allclose(top.slot_act(M2.I, 1, M2.g), -M2.I.T)


def test_slot_act_errors():
    with pytest.raises(ValueError):
        top.slot_act(M2.I, 0, rand((8, 8), 1))
    with pytest.raises(ValueError):
        top.slot_act(M2.I, 3, rand((8, 8), 1))


def test_full_act_examples():
    for A in M2.triple:
        assert np.allclose(top.full_act(A, M2.g), M2.g)
    assert np.allclose(top.full_act(M2.I, M2.I), M2.I)      # I omega_I = omega_I
    assert np.allclose(top.full_act(M2.I, M2.J), -M2.J)     # I omega_J = -omega_J


def test_slot_acts_on_distinct_slots_commute_exactly():
    b = rand((8, 8, 8, 8), 5)
    one = top.slot_act(M2.I, 1, top.slot_act(M2.J, 3, b))
    two = top.slot_act(M2.J, 3, top.slot_act(M2.I, 1, b))
    assert np.array_equal(one, two)


def test_adjoint_identity_under_curvature_inner():
    a4, b4 = rand((8,) * 4, 7), rand((8,) * 4, 8)
    for A in M2.triple:
        for i in range(1, 5):
            lhs = top.curvature_inner(top.slot_act(A, i, a4), b4)
            rhs = -top.curvature_inner(a4, top.slot_act(A, i, b4))
            assert lhs == pytest.approx(rhs, rel=1e-10)


# --- inner products ---------------------------------------------------------

def test_p_form_inner_examples():
    assert top.p_form_inner(M2.I, M2.J) == pytest.approx(0.0)
    assert top.p_form_inner(M2.I, M2.I) == pytest.approx(4.0)
    with pytest.raises(ValueError):
        top.p_form_inner(M2.I, rand((8, 8, 8), 0))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_p_form_inner_positive_definite(seed):
    raw = cs.substream("hyp-form", seed).standard_normal((8, 8))
    a = raw - raw.T
    val = top.p_form_inner(a, a)
    assert val >= 0.0
    if np.max(np.abs(a)) > 1e-12:
        assert val > 0.0


def test_curvature_inner_examples():
    assert top.curvature_inner(np.zeros((8,) * 4), M2.pi1) == 0.0
    with pytest.raises(ValueError):
        top.curvature_inner(rand((8, 8), 0), rand((8, 8), 1))


# --- products ----------------------------------------------------------------

def wedge2_oracle(b, c):
    """Independent elementwise shuffle-sum wedge of 2-forms."""
    d = b.shape[0]
    out = np.zeros((d,) * 4)
    for x, y, z, u in itertools.product(range(d), repeat=4):
        out[x, y, z, u] = (b[x, y] * c[z, u] - b[x, z] * c[y, u]
                           + b[x, u] * c[y, z] + b[y, z] * c[x, u]
                           - b[y, u] * c[x, z] + b[z, u] * c[x, y])
    return out


def test_wedge2_matches_oracle_and_alternation():
    d = 4  # small dimension keeps the elementwise oracle cheap
    rng = cs.substream("wedge", 0)
    b = rng.standard_normal((d, d)); b -= b.T
    c = rng.standard_normal((d, d)); c -= c.T
    w = top.wedge2(b, c)
    assert np.allclose(w, wedge2_oracle(b, c))
    assert np.allclose(w, 6.0 * top.alt(np.einsum("xy,zu->xyzu", b, c)))
    assert np.allclose(w, top.wedge2(c, b))


def test_odot_symmetry():
    b, c = rand((8, 8), 1), rand((8, 8), 2)
    assert np.allclose(top.odot(b, c), top.odot(c, b))
    assert np.allclose(top.odot(b, -b), -top.odot(b, b))


def test_psi_vartheta_normalization():
    # the wedge convention is pinned by these two identities
    assert np.allclose(dec.psi(M2.g, M2.g), 2.0 * M2.pi1)
    assert np.allclose(dec.vartheta(M2, M2.g, M2.g), 4.0 * M2.pi2)


def test_omega_wedge_term_of_fundamental_form():
    from qhcurv import model_space as ms
    w = M2.omegas[0]
    assert np.allclose(ms.fundamental_four_form(M2.omegas[:1]), top.wedge2(w, w))


# --- skewing maps -------------------------------------------------------------

def test_skew_a():
    T = rand((8, 8, 8), 9)
    anti = T - T.swapaxes(0, 1)
    assert np.allclose(top.skew_a(anti), anti)       # fixed point on antisymmetric
    assert np.allclose(top.skew_a(top.skew_a(T)), top.skew_a(T))
    with pytest.raises(ValueError):
        top.skew_a(rand((8,), 0))


def test_b_tilde():
    xi, zeta = rand((8, 8, 8), 10), rand((8, 8, 8), 11)
    out = top.b_tilde(xi, zeta)
    assert np.allclose(out, -out.swapaxes(0, 1))           # antisymmetric in (X, Y)
    assert np.allclose(top.b_tilde(xi, np.zeros_like(xi)), 0.0)
    # elementwise: <e_m, xi_{zeta_x e_y} e_z>
    x, y, mm, z = 1, 4, 2, 6
    expect = sum(zeta[x, w, y] * xi[w, mm, z] for w in range(8)) \
        - sum(zeta[y, w, x] * xi[w, mm, z] for w in range(8))
    assert out[x, y, mm, z] == pytest.approx(expect)


def test_alt_is_projection_with_correct_signs():
    T = rand((6, 6, 6), 12)
    a = top.alt(T)
    assert np.allclose(top.alt(a), a)
    assert np.allclose(a, -a.swapaxes(0, 1))
    assert np.allclose(a, -a.swapaxes(1, 2))


def test_sigma_perm():
    R = rand((8,) * 4, 13)
    S = top.sigma_perm(R)
    assert S[2, 5, 1, 7] == R[1, 2, 5, 7]
    assert np.allclose(top.sigma_perm(top.sigma_perm(S)), R)


def test_dense_tensor_wrapper():
    w = top.DenseTensor(M2.I, tag="form")
    w.validate()
    assert w.rank == 2 and w.dim == 8
    with pytest.raises(ValueError):
        top.DenseTensor(M2.g, tag="form").validate()
    top.DenseTensor(M2.g, tag="symmetric2").validate()
    top.DenseTensor(M2.pi1, tag="curvature-pair").validate()
    with pytest.raises(ValueError):
        top.DenseTensor(M2.g, tag="weird")
    with pytest.raises(ValueError):
        top.DenseTensor(np.zeros((3, 4)))
