"""Randomized contribution-table engine.

For every source (the gamma trace, a single component of nabla~xi, or a
symmetric product of torsion components) and every curvature / Ricci
target, the engine samples seeded single-component states, evaluates the
closed formulas, projects onto the target, and records whether the
coupling is nonzero.  Off-diagonal products are handled by polarization:
each quadratic target is evaluated at xi + zeta and the pure terms are
subtracted.

Tick rule: a cell is ticked when the witness exceeds ``TICK_ON`` times the
input scale on at least one seed, unticked when every seed stays below
``TICK_OFF`` times the scale, and flagged ambiguous otherwise (the gap
forces explicit escalation instead of silently resolving borderline
cells).

The expected tick patterns are embedded below, together with the
direction annotations for the R_a + R_b column (the contribution there is
a fixed combination of a = pi2 + 6 pi1 and b = pi2 - 6 pi1 per row).
A few embedded cells deviate knowingly from the reference tables; each is
recorded in REFERENCE_DEVIATIONS with the reason that forces it.  The
table diff reports mismatches in the columns affected by derivation
choices (L20ES2H, V211S2H, L20ES4H) as "remark-consistent" rather than
failing, and couplings that vanish identically at the evaluated n while
being generically present (LOW_N_VANISHING) as "low_n_zero".
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import curvature_from_torsion as cft
from . import curvature_space as cs
from . import decomposition as dec
from . import tensor_ops as top
from . import torsion as tor
from .model_space import ModelSpace

TICK_ON = 1e-7
TICK_OFF = 1e-9
DEFAULT_SEEDS = 8

#: Columns whose ticks depend on which formulas are used (closing-remark
#: freedom): mismatches there are reported, not failed.
REMARK_COLUMNS = ("q_L20ES2H", "L20ES2H", "V211S2H", "L20ES4H")

COMPS = tor.TORSION_COMPONENTS

TABLE1_COLUMNS = ("q_R", "q_L20E", "q_S2ES2H", "q_L20ES2H",
                  "r_R", "r_L20E", "r_S2ES2H")
TABLE2_COLUMNS = ("R_a", "R_b", "L20E_a", "L20E_b",
                  "S2ES2H_a", "S2ES2H_b", "L20ES2H")
TABLE3_COLUMNS = ("V22", "L40E", "V31S2H", "V211S2H",
                  "V22S4H", "L20ES4H", "S4H")

OFFDIAG_PAIRS = (("33", "K3"), ("33", "E3"), ("33", "3H"), ("33", "KH"),
                 ("33", "EH"), ("K3", "E3"), ("K3", "3H"), ("K3", "KH"),
                 ("K3", "EH"), ("E3", "3H"), ("E3", "KH"), ("E3", "EH"),
                 ("3H", "KH"), ("3H", "EH"), ("KH", "EH"))


def row_keys():
    """All rows in the layout order of the reference tables."""
    rows = [("gamma",)]
    rows += [("D", c) for c in COMPS]
    rows += [("xx", c, c) for c in COMPS]
    rows += [("xx", a, b) for a, b in OFFDIAG_PAIRS]
    return rows


def row_label(key) -> str:
    if key[0] == "gamma":
        return "sum<gamma_A,omega_A>"
    if key[0] == "D":
        return f"Dxi_{key[1]}"
    a, b = key[1], key[2]
    return f"xi_{a}*xi_{a}" if a == b else f"xi_{a}.xi_{b}"


# ---------------------------------------------------------------------------
# Expected tick patterns (the reference tables, with the deviations
# recorded in REFERENCE_DEVIATIONS applied).

def _t1(q_r=0, q_l=0, q_s=0, q_ls=0, r_r=0, r_l=0, r_s=0):
    cols = (q_r, q_l, q_s, q_ls, r_r, r_l, r_s)
    return {c for c, v in zip(TABLE1_COLUMNS, cols) if v}

EXPECTED_TABLE1 = {
    ("gamma",): _t1(q_r=1, r_r=1),
    # the reference S2ES2H ticks of the two Lambda^3_0-derivative rows are
    # Schur-forbidden (E (x) Lambda^3_0 E contains no S^2 E for any n);
    # see REFERENCE_DEVIATIONS
    ("D", "33"): _t1(q_ls=1),
    ("D", "K3"): _t1(q_s=1, q_ls=1, r_s=1),
    ("D", "E3"): _t1(q_s=1, q_ls=1, r_s=1),
    ("D", "3H"): _t1(q_l=1, q_ls=1, r_l=1),
    ("D", "KH"): _t1(q_l=1, q_s=1, q_ls=1, r_l=1, r_s=1),
    ("D", "EH"): _t1(q_l=1, q_s=1, q_ls=1, r_r=1, r_l=1, r_s=1),
    ("xx", "33", "33"): _t1(q_r=1, q_l=1, q_s=1, r_r=1, r_l=1, r_s=1),
    ("xx", "K3", "K3"): _t1(q_r=1, q_l=1, q_s=1, r_r=1, r_l=1, r_s=1),
    ("xx", "E3", "E3"): _t1(q_r=1, q_l=1, q_s=1, r_r=1, r_l=1, r_s=1),
    ("xx", "3H", "3H"): _t1(q_r=1, q_l=1, q_s=1, r_r=1, r_l=1, r_s=1),
    ("xx", "KH", "KH"): _t1(q_r=1, q_l=1, q_s=1, r_r=1, r_l=1, r_s=1),
    ("xx", "EH", "EH"): _t1(q_r=1, q_l=1, q_s=1, r_r=1, r_l=1, r_s=1),
    ("xx", "33", "K3"): _t1(q_l=1, q_s=1, q_ls=1, r_l=1, r_s=1),
    ("xx", "33", "E3"): _t1(q_l=1, q_ls=1, r_l=1),
    ("xx", "33", "3H"): _t1(q_s=1, q_ls=1, r_s=1),
    ("xx", "33", "KH"): _t1(q_s=1, q_ls=1, r_s=1),
    ("xx", "33", "EH"): _t1(q_ls=1),
    ("xx", "K3", "E3"): _t1(q_l=1, q_s=1, q_ls=1, r_l=1, r_s=1),
    ("xx", "K3", "3H"): _t1(q_s=1, q_ls=1, r_s=1),
    ("xx", "K3", "KH"): _t1(q_s=1, q_ls=1, r_s=1),
    ("xx", "K3", "EH"): _t1(q_s=1, q_ls=1, r_s=1),
    ("xx", "E3", "3H"): _t1(q_ls=1),
    ("xx", "E3", "KH"): _t1(q_s=1, q_ls=1, r_s=1),
    ("xx", "E3", "EH"): _t1(q_s=1, q_ls=1, r_s=1),
    ("xx", "3H", "KH"): _t1(q_l=1, q_s=1, q_ls=1, r_l=1, r_s=1),
    ("xx", "3H", "EH"): _t1(q_l=1, q_ls=1, r_l=1),
    ("xx", "KH", "EH"): _t1(q_l=1, q_s=1, q_ls=1, r_l=1, r_s=1),
}


def _t2(r=0, l=0, s=0, ls=0):
    out = set()
    if r:
        out |= {"R_a", "R_b"}
    if l:
        out |= {"L20E_a", "L20E_b"}
    if s:
        out |= {"S2ES2H_a", "S2ES2H_b"}
    if ls:
        out.add("L20ES2H")
    return out

EXPECTED_TABLE2 = {
    ("gamma",): _t2(r=1),
    ("D", "33"): _t2(ls=1),
    ("D", "K3"): _t2(s=1, ls=1),
    ("D", "E3"): _t2(s=1, ls=1),
    ("D", "3H"): _t2(l=1, ls=1),
    ("D", "KH"): _t2(l=1, s=1, ls=1),
    ("D", "EH"): _t2(r=1, l=1, s=1, ls=1),
    ("xx", "33", "33"): _t2(r=1, l=1, s=1),
    ("xx", "K3", "K3"): _t2(r=1, l=1, s=1),
    ("xx", "E3", "E3"): _t2(r=1, l=1, s=1),
    ("xx", "3H", "3H"): _t2(r=1, l=1, s=1),
    ("xx", "KH", "KH"): _t2(r=1, l=1, s=1),
    ("xx", "EH", "EH"): _t2(r=1, l=1, s=1),
    ("xx", "33", "K3"): _t2(l=1, s=1, ls=1),
    ("xx", "33", "E3"): _t2(l=1, ls=1),
    ("xx", "33", "3H"): _t2(s=1, ls=1),
    ("xx", "33", "KH"): _t2(s=1, ls=1),
    ("xx", "33", "EH"): _t2(ls=1),
    # the reference curvature table leaves (L20E)_x empty here,
    # contradicting the reference Ricci table and the evaluated formulas;
    # see REFERENCE_DEVIATIONS.
    ("xx", "K3", "E3"): _t2(l=1, s=1, ls=1),
    ("xx", "K3", "3H"): _t2(s=1, ls=1),
    ("xx", "K3", "KH"): _t2(s=1, ls=1),
    ("xx", "K3", "EH"): _t2(s=1, ls=1),
    ("xx", "E3", "3H"): _t2(ls=1),
    ("xx", "E3", "KH"): _t2(s=1, ls=1),
    ("xx", "E3", "EH"): _t2(s=1, ls=1),
    ("xx", "3H", "KH"): _t2(l=1, s=1, ls=1),
    ("xx", "3H", "EH"): _t2(l=1, ls=1),
    ("xx", "KH", "EH"): _t2(l=1, s=1, ls=1),
}


def _t3(*names):
    return set(names)

EXPECTED_TABLE3 = {
    ("D", "33"): _t3("V211S2H", "L20ES4H"),
    ("D", "K3"): _t3("V31S2H", "V211S2H", "V22S4H", "L20ES4H"),
    ("D", "E3"): _t3("L20ES4H", "S4H"),
    ("D", "3H"): _t3("L40E", "V211S2H"),
    ("D", "KH"): _t3("V22", "V31S2H", "V211S2H"),
    ("D", "EH"): _t3(),
    ("xx", "33", "33"): _t3("V22", "L40E", "V211S2H", "V22S4H", "L20ES4H", "S4H"),
    ("xx", "K3", "K3"): _t3("V22", "L40E", "V31S2H", "V22S4H", "L20ES4H", "S4H"),
    ("xx", "E3", "E3"): _t3("L20ES4H", "S4H"),
    ("xx", "3H", "3H"): _t3("V22", "L40E", "V211S2H"),
    ("xx", "KH", "KH"): _t3("V22", "L40E", "V31S2H"),
    ("xx", "EH", "EH"): _t3(),
    ("xx", "33", "K3"): _t3("V22", "L40E", "V31S2H", "V211S2H", "V22S4H", "L20ES4H"),
    ("xx", "33", "E3"): _t3("L40E", "V211S2H", "L20ES4H"),
    ("xx", "33", "3H"): _t3("V211S2H", "V22S4H", "L20ES4H", "S4H"),
    ("xx", "33", "KH"): _t3("V31S2H", "V211S2H", "V22S4H", "L20ES4H"),
    ("xx", "33", "EH"): _t3("V211S2H", "L20ES4H"),
    ("xx", "K3", "E3"): _t3("V22", "V31S2H", "V211S2H", "V22S4H", "L20ES4H"),
    ("xx", "K3", "3H"): _t3("V31S2H", "V211S2H", "V22S4H", "L20ES4H"),
    ("xx", "K3", "KH"): _t3("V31S2H", "V211S2H", "V22S4H", "L20ES4H", "S4H"),
    ("xx", "K3", "EH"): _t3("V31S2H", "V211S2H", "V22S4H", "L20ES4H"),
    ("xx", "E3", "3H"): _t3("V211S2H", "L20ES4H"),
    ("xx", "E3", "KH"): _t3("V31S2H", "V211S2H", "V22S4H", "L20ES4H"),
    ("xx", "E3", "EH"): _t3("L20ES4H", "S4H"),
    ("xx", "3H", "KH"): _t3("V22", "L40E", "V31S2H", "V211S2H"),
    ("xx", "3H", "EH"): _t3("L40E", "V211S2H"),
    ("xx", "KH", "EH"): _t3("V22", "V31S2H", "V211S2H"),
}

#: Cells where the embedded expectation deviates from the reference
#: tables because those contradict each other or the formulas they
#: tabulate; resolved by direct measurement.  (row label, table, column)
#: -> explanation.
_SCHUR_33 = ("reference tick is Schur-forbidden: the curvature S2ES2H modules "
             "need S^2E content, and E (x) Lambda^3_0 E = Lambda^4_0 E + "
             "V211 + Lambda^2_0 E contains no S^2 E for any n; embedded as "
             "unticked (measured zero at n = 2, 3)")

REFERENCE_DEVIATIONS = {
    ("xi_K3.xi_E3", 2, "L20E_a"):
        "the reference curvature table leaves the (L20E)_x cell empty, but "
        "the reference Ricci table ticks both L20E columns for this row and "
        "the evaluated formulas are nonzero; embedded as ticked",
    ("xi_K3.xi_E3", 2, "L20E_b"):
        "same as the (L20E)_a cell of this row",
    ("Dxi_33", 1, "q_S2ES2H"): _SCHUR_33,
    ("Dxi_33", 1, "r_S2ES2H"): _SCHUR_33,
    ("Dxi_33", 2, "S2ES2H_a"): _SCHUR_33,
    ("Dxi_33", 2, "S2ES2H_b"): _SCHUR_33,
    ("Dxi_3H", 1, "q_S2ES2H"): _SCHUR_33,
    ("Dxi_3H", 1, "r_S2ES2H"): _SCHUR_33,
    ("Dxi_3H", 2, "S2ES2H_a"): _SCHUR_33,
    ("Dxi_3H", 2, "S2ES2H_b"): _SCHUR_33,
}

#: Cells whose generic coupling vanishes identically at one low n (verified
#: nonzero at a higher n); reported as 'low_n_zero', never as mismatch.
#: The zero-rank-column skips of the audit do not cover these: the target
#: modules are nonzero, the specific quadratic couplings degenerate.
LOW_N_VANISHING = {
    2: {
        ("xi_K3*xi_K3", "q_L20E"), ("xi_K3*xi_K3", "r_L20E"),
        ("xi_K3*xi_K3", "L20E_a"), ("xi_K3*xi_K3", "V31S2H"),
        ("xi_K3*xi_K3", "r_S2ES2H"),
        ("xi_E3*xi_E3", "r_S2ES2H"),
        ("xi_KH*xi_KH", "q_L20E"), ("xi_KH*xi_KH", "r_L20E"),
        ("xi_KH*xi_KH", "L20E_a"),
        ("xi_K3.xi_E3", "V31S2H"), ("xi_K3.xi_E3", "r_S2ES2H"),
    },
    3: {
        ("xi_33*xi_33", "q_L20E"), ("xi_33*xi_33", "r_L20E"),
        ("xi_33*xi_33", "L20E_a"), ("xi_33*xi_33", "L20E_b"),
        ("xi_3H*xi_3H", "q_L20E"), ("xi_3H*xi_3H", "r_L20E"),
        ("xi_3H*xi_3H", "L20E_a"), ("xi_3H*xi_3H", "L20E_b"),
        ("xi_E3*xi_E3", "S4H"),
        ("xi_K3.xi_E3", "V22S4H"),
    },
}


# Direction annotations for the R_a + R_b column of Table 2: each entry is
# (direction, orthogonal witness, source) with coefficient pairs (alpha,
# beta) meaning alpha*a + beta*b.  Four rows carry the reference
# annotations (which the free evaluation reproduces exactly); for the
# other four the reference annotations hold only modulo the on-shell
# trades discussed in the curvature_from_torsion module docstring, and
# the embedded directions are the ones the Ricci formulas actually
# produce (closed forms fitted exactly at n = 2, 3, 4).
def direction_annotations(n: int) -> dict:
    k1, k2 = n - 1.0, 2.0 * n + 1.0
    f = n * n + 3.0 * n + 1.0
    g = n * n + 1.0
    eh_a = -2.0 * (n - 1.0) * (10.0 * n ** 3 + 17.0 * n * n - 2.0 * n - 1.0)
    eh_b = (2.0 * n + 1.0) * (10.0 * n ** 3 - 13.0 * n * n - 8.0 * n - 1.0)

    def orth(direction):
        # metric-orthogonal complement within span{a, b}
        na2 = 1152.0 * n * (2.0 * n + 1.0)   # <a, a>
        nb2 = 2304.0 * n * (n - 1.0)         # <b, b>
        al, be = direction
        return (be * nb2, -al * na2)

    out = {
        ("gamma",): ((2.0, 1.0), (k1, -k2), "reference"),
        ("D", "EH"): ((2.0 * k1, -k2), (1.0, 1.0), "reference"),
        ("xx", "33", "33"): ((5.0 * k1, -k2), (2.0, 5.0), "reference"),
        ("xx", "E3", "E3"): ((2.0 * k1 * f, -k2 * g), (g, f), "reference"),
        ("xx", "K3", "K3"): ((2.0 * k1, 5.0 * k2), None, "derived"),
        ("xx", "3H", "3H"): ((-4.0 * k1, -k2), None, "derived"),
        ("xx", "KH", "KH"): ((-4.0 * k1, -k2), None, "derived"),
        ("xx", "EH", "EH"): ((eh_a, eh_b), None, "derived"),
    }
    return {key: (d, q if q is not None else orth(d), src)
            for key, (d, q, src) in out.items()}


# ---------------------------------------------------------------------------
# Column evaluation.

@dataclass
class TableContext:
    """Precomputed machinery shared by all cells."""

    m: ModelSpace
    bank: dec.ProjectorBank
    tbank: tor.TorsionBank
    pi2_pinv: np.ndarray          # (dim QKperp) x m^2 least-squares inverse
    comp_in_qkperp: dict          # fine component rows expressed on QKperp

    @classmethod
    def build(cls, bank: dec.ProjectorBank, tbank: tor.TorsionBank):
        m = bank.model
        ps = bank.scheme
        rows = bank.qkperp
        img = np.empty_like(rows)
        for k, row in enumerate(rows):
            T = cs.from_pair_coords(ps, row)
            img[k] = cs.to_pair_coords(ps, cft.pi1_operator(m, T))
        pinv = np.linalg.pinv(img.T, rcond=1e-10)
        comp = {name: bank.fine[name].rows @ rows.T for name in TABLE3_COLUMNS}
        return cls(m=m, bank=bank, tbank=tbank, pi2_pinv=pinv,
                   comp_in_qkperp=comp)

    def qkperp_coefficients(self, T: np.ndarray) -> np.ndarray:
        """pi_2 of a Lambda^2 x Lambda^2 tensor, as QKperp coefficients."""
        return self.pi2_pinv @ cs.to_pair_coords(self.bank.scheme, T)


def evaluate_columns(ctx: TableContext, state: cft.TorsionState) -> dict:
    """All column values for one state: Ricci components (tables 1-2) and
    the QKperp projections of pi_2 pi_1 (table 3)."""
    m = ctx.m
    out = {}
    out["q_R"] = cft.pi_r_ricq(m, state)
    out["q_L20E"] = cft.pi_l20e_ricq(m, state)
    out["q_S2ES2H"] = cft.pi_s2es2h_ricq(m, state)
    out["q_L20ES2H"] = cft.pi_l20es2h_ricq(m, state)
    out["r_R"] = cft.pi_r_ric(m, state)
    out["r_L20E"] = cft.pi_l20e_ric(m, state)
    out["r_S2ES2H"] = cft.pi_s2es2h_ric(m, state)
    ca, cb = cft.ra_rb_coefficients(m, state)
    out["R_ab"] = np.array([ca, cb])
    out["L20E_a"] = cft.ric_l20e_a(m, state)
    out["L20E_b"] = cft.ric_l20e_b(m, state)
    out["S2ES2H_a"] = cft.ric_s2es2h_a(m, state)
    out["S2ES2H_b"] = cft.ric_s2es2h_b(m, state)
    out["L20ES2H"] = out["q_L20ES2H"]
    coeffs = ctx.qkperp_coefficients(cft.pi1_state(m, state))
    for name in TABLE3_COLUMNS:
        out[name] = ctx.comp_in_qkperp[name] @ coeffs
    return out


def _combine(vals, coefs):
    out = {}
    for key in vals[0]:
        out[key] = sum(c * v[key] for c, v in zip(coefs, vals))
    return out


def evaluate_row(ctx: TableContext, key, seed) -> dict:
    """Column values for one source row and one seed (polarized for the
    off-diagonal products)."""
    m = ctx.m
    if key[0] == "gamma":
        state = cft.TorsionState.qk_point(m, 1.0)
        return evaluate_columns(ctx, state)
    if key[0] == "D":
        D = tor.random_derivative_component(ctx.tbank, key[1], seed)
        return evaluate_columns(ctx, cft.TorsionState.make(m, D=D))
    _, c1, c2 = key
    t1 = ctx.tbank.random_component(c1, seed)
    if c1 == c2:
        return evaluate_columns(ctx, cft.TorsionState.make(m, t=t1))
    t2 = ctx.tbank.random_component(c2, seed)
    vals = [evaluate_columns(ctx, cft.TorsionState.make(m, t=t))
            for t in (t1 + t2, t1, t2)]
    return _combine(vals, (1.0, -1.0, -1.0))


def _witnesses(ctx: TableContext, cols: dict) -> dict:
    """Scalar witness per table cell from the raw column values."""
    m = ctx.m
    norm_a = np.sqrt(top.curvature_inner(m.pi2 + 6 * m.pi1, m.pi2 + 6 * m.pi1))
    norm_b = np.sqrt(top.curvature_inner(m.pi2 - 6 * m.pi1, m.pi2 - 6 * m.pi1))
    w = {}
    for name in ("q_R", "r_R"):
        w[name] = abs(cols[name]) * np.sqrt(m.dim)
    for name in ("q_L20E", "q_S2ES2H", "q_L20ES2H", "r_L20E", "r_S2ES2H",
                 "L20E_a", "L20E_b", "S2ES2H_a", "S2ES2H_b", "L20ES2H"):
        w[name] = top.frob(cols[name])
    w["R_a"] = abs(cols["R_ab"][0]) * norm_a
    w["R_b"] = abs(cols["R_ab"][1]) * norm_b
    for name in TABLE3_COLUMNS:
        w[name] = float(np.linalg.norm(cols[name]))
    return w


# ---------------------------------------------------------------------------
# Report structures.

@dataclass
class ContributionCell:
    source: str
    table: int
    target: str
    tick: bool
    witness: float
    seeds_used: int
    expected: bool | None = None
    status: str = "ok"           # ok | mismatch | remark | ambiguous | skipped


@dataclass
class TablesReport:
    n: int
    seeds: int
    cells: list = field(default_factory=list)
    direction_checks: list = field(default_factory=list)
    skipped_columns: tuple = ()

    @property
    def mismatches(self):
        return [c for c in self.cells if c.status == "mismatch"]

    @property
    def remark_cells(self):
        return [c for c in self.cells if c.status == "remark"]

    @property
    def ambiguous(self):
        return [c for c in self.cells if c.status == "ambiguous"]

    @property
    def ok(self) -> bool:
        return not self.mismatches and not self.ambiguous


def _zero_rank_columns(bank: dec.ProjectorBank) -> set:
    out = set()
    for name in ("L40E", "L20E_b", "V211S2H"):
        if bank.fine[name].rank == 0:
            out.add(name)
    return out


def run_tables(bank: dec.ProjectorBank, tbank: tor.TorsionBank,
               seeds: int = DEFAULT_SEEDS,
               direction_tol: float = 1e-8) -> TablesReport:
    """Evaluate every cell of the three tables and diff against the embedded
    expectations; verify the R_x direction annotations of Table 2."""
    ctx = TableContext.build(bank, tbank)
    m = ctx.m
    n = m.n
    skipped = _zero_rank_columns(bank)
    report = TablesReport(n=n, seeds=seeds, skipped_columns=tuple(sorted(skipped)))
    annotations = direction_annotations(n)

    table_specs = [(1, TABLE1_COLUMNS, EXPECTED_TABLE1),
                   (2, TABLE2_COLUMNS, EXPECTED_TABLE2),
                   (3, TABLE3_COLUMNS, EXPECTED_TABLE3)]

    for key in row_keys():
        zero_source = (key[0] in ("D", "xx")
                       and any(tbank.rank(c) == 0 for c in key[1:]))
        nseeds = 1 if key[0] == "gamma" else seeds
        per_seed = []
        if not zero_source:
            for s in range(nseeds):
                cols = evaluate_row(ctx, key, s)
                per_seed.append((_witnesses(ctx, cols), cols))
        for table, columns, expected_map in table_specs:
            if table == 3 and key not in EXPECTED_TABLE3:
                continue
            expected = expected_map.get(key, set())
            for col in columns:
                if zero_source or col in skipped:
                    report.cells.append(ContributionCell(
                        source=row_label(key), table=table, target=col,
                        tick=False, witness=0.0, seeds_used=0,
                        expected=col in expected, status="skipped"))
                    continue
                ws = [w[col] for w, _ in per_seed]
                wmax = max(ws)
                if wmax > TICK_ON:
                    tick, status = True, "ok"
                elif wmax < TICK_OFF:
                    tick, status = False, "ok"
                else:
                    tick, status = False, "ambiguous"
                exp = col in expected
                if status != "ambiguous" and tick != exp:
                    if (not tick and exp
                            and (row_label(key), col) in LOW_N_VANISHING.get(n, ())):
                        status = "low_n_zero"
                    elif col in REMARK_COLUMNS:
                        status = "remark"
                    else:
                        status = "mismatch"
                report.cells.append(ContributionCell(
                    source=row_label(key), table=table, target=col,
                    tick=tick, witness=wmax, seeds_used=len(ws),
                    expected=exp, status=status))
        # direction annotations
        if key in annotations and not zero_source:
            direction, orth, provenance = annotations[key]
            norm_a2 = top.curvature_inner(m.pi2 + 6 * m.pi1, m.pi2 + 6 * m.pi1)
            norm_b2 = top.curvature_inner(m.pi2 - 6 * m.pi1, m.pi2 - 6 * m.pi1)
            for s, (w, cols) in enumerate(per_seed):
                ca, cb = cols["R_ab"]
                tt = np.array([ca, cb])
                pp = np.array(direction, dtype=float)
                qq = np.array(orth, dtype=float)
                met = np.diag([norm_a2, norm_b2])
                tn = float(np.sqrt(tt @ met @ tt))
                pn = float(np.sqrt(pp @ met @ pp))
                qn = float(np.sqrt(qq @ met @ qq))
                cosd = float(tt @ met @ pp) / (tn * pn)
                cosq = float(tt @ met @ qq) / (tn * qn)
                quadratic = key[0] == "xx"
                aligned = (cosd > 1.0 - direction_tol) if quadratic \
                    else (abs(cosd) > 1.0 - direction_tol)
                report.direction_checks.append({
                    "source": row_label(key), "seed": s,
                    "annotation": provenance,
                    "cos_direction": cosd, "cos_orthogonal": cosq,
                    "aligned": bool(aligned and abs(cosq) < direction_tol),
                })
    return report


# ---------------------------------------------------------------------------
# Torsion-class corollaries: with xi restricted to a family of components
# (and nabla~xi in the same second-factor family), certain curvature
# components receive no contribution at all.

COROLLARY_CASES = (
    ("quaternionic (H classes only)", ("3H", "KH", "EH"),
     ("V22S4H", "L20ES4H", "S4H")),
    ("E-type torsion", ("E3", "EH"),
     ("V22", "L40E", "V31S2H", "V211S2H", "V22S4H")),
    ("Lambda^3_0-type torsion", ("33", "3H"),
     ("V31S2H",)),
)


def corollary_vanishing(ctx: TableContext, seeds: int = 2) -> list:
    """Max witness of every forbidden component over the rows allowed by
    each corollary hypothesis; all should sit at roundoff level."""
    tbank = ctx.tbank
    results = []
    for label, comps, forbidden in COROLLARY_CASES:
        live = [c for c in comps if tbank.rank(c)]
        worst = 0.0
        for s in range(seeds):
            states = []
            for c in live:
                states.append(cft.TorsionState.make(
                    ctx.m, D=tor.random_derivative_component(tbank, c, (label, s))))
            for i, c1 in enumerate(live):
                t1 = tbank.random_component(c1, (label, s, 1))
                states.append(cft.TorsionState.make(ctx.m, t=t1))
                for c2 in live[i + 1:]:
                    t2 = tbank.random_component(c2, (label, s, 2))
                    states.append(cft.TorsionState.make(ctx.m, t=t1 + t2))
            for st in states:
                coeffs = ctx.qkperp_coefficients(cft.pi1_state(ctx.m, st))
                for name in forbidden:
                    worst = max(worst, float(np.linalg.norm(
                        ctx.comp_in_qkperp[name] @ coeffs)))
        results.append({"case": label, "forbidden": forbidden, "max_witness": worst})
    return results
