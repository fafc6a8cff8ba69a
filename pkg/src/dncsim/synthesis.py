"""Syntheses, cut-state machinery, and sub-synthesis construction.

A synthesis is a circuit together with three register roles:

    L  traced out,
    M  post-selected to |0>,
    N  output (the evaluated quantity is <0_N| phi |0_N>).

Children produced by cutting carry small *cut-operator annotations* at their
cut-adjacent bands: an input state on the band for the right-hand child, a
positive sandwich operator on the band for the left-hand child, and explicit
projector insertions for the middle pieces of multi-cut terms.  Annotation
operators are always confined to a band of thickness equal to the circuit
depth, which is what keeps the recursion compositional.

Cut-state structure exploited throughout: for a slice of width >= 2d the
conditioned front state factors through the band,

    rho_front = W omega W^dagger,

with W the band-to-front contraction built from the gates in the forward
light cone of the front region and omega the band state conditioned on zeros
behind the cut.  All spectral quantities (kappa, projectors, residuals) are
computed from the band-sized Gram matrix of W sqrt(omega), so nothing large
is ever diagonalized.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import oracle
from .geomcircuit import Coord, CutError, Gate, LatticeCircuit, Slice, cone_gates

# ---------------------------------------------------------------------------
# types
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CutOp:
    """Operator annotation attached to a synthesis.

    kinds:
      input_state  PSD matrix: initial state of `qubits` (loaded by purification)
      sandwich     matrix (or low-rank factors) applied after the M projection
      insertion    |0><0| on `project_zero`, then the low-rank projector on `qubits`
    """

    kind: str
    qubits: tuple[Coord, ...]
    matrix: np.ndarray | None = None
    factors: np.ndarray | None = None
    coeffs: np.ndarray | None = None
    project_zero: tuple[Coord, ...] = ()

    def shifted(self, axis: int, delta: int) -> "CutOp":
        move = lambda qs: tuple(
            tuple(c + delta if k == axis else c for k, c in enumerate(q)) for q in qs
        )
        return replace(self, qubits=move(self.qubits), project_zero=move(self.project_zero))


@dataclass(frozen=True, eq=False)
class Synthesis:
    """Register-tagged circuit; evaluates to <0_N| phi |0_N>.

    `declared_axes` lists which coordinate positions count as lattice
    dimensions (dimension reduction shrinks it); `thickness` records absorbed
    widths.  `origin` is the absolute coordinate of this synthesis's (0,..,0)
    site in the top-level lattice, used to match globally-enumerated slices.
    """

    gamma: LatticeCircuit
    L: tuple[Coord, ...]
    M: tuple[Coord, ...]
    N: tuple[Coord, ...]
    declared_axes: tuple[int, ...]
    thickness: tuple[int, ...] = ()
    cut_ops: tuple[CutOp, ...] = ()
    origin: tuple[int, ...] = ()

    def __post_init__(self):
        sites = set(self.gamma.sites())
        roles = set(self.L) | set(self.M) | set(self.N)
        if roles != sites:
            raise ValueError("L, M, N must partition the lattice sites")
        if len(set(self.L)) + len(set(self.M)) + len(set(self.N)) != len(sites):
            raise ValueError("L, M, N must be disjoint")

    @property
    def declared_dims(self) -> tuple[int, ...]:
        return tuple(self.gamma.dims[a] for a in self.declared_axes)

    @property
    def depth(self) -> int:
        return self.gamma.depth

    def width(self, axis: int) -> int:
        return self.gamma.dims[axis]

    def value(self, cap: int = oracle.DEFAULT_CAP) -> float:
        return oracle.synthesis_value_exact(self, cap=cap)


def synthesis_of_circuit(circ: LatticeCircuit) -> Synthesis:
    """Trivial synthesis: L = M = empty, N = all qubits."""
    return Synthesis(
        gamma=circ,
        L=(),
        M=(),
        N=circ.sites(),
        declared_axes=tuple(range(len(circ.dims))),
        origin=(0,) * len(circ.dims),
    )


@dataclass(frozen=True)
class CutCalculus:
    """How cut operators are realized.

    exact-spectral: orthogonal eigenprojector above tau, kappa from trace
    powers; power-encoding: literal density-operator powers rho^K.
    """

    mode: str = "exact-spectral"
    tau: float = 1e-6
    K: int = 2
    T: int = 2

    def __post_init__(self):
        if self.mode not in ("exact-spectral", "power-encoding"):
            raise ValueError(f"unknown calculus mode {self.mode!r}")
        if self.K < 1 or self.T < 1:
            raise ValueError("K and T must be >= 1")


class SplitError(ValueError):
    pass


# ---------------------------------------------------------------------------
# cut-state engine
# ---------------------------------------------------------------------------


def _axis_filter(s: Synthesis, lo, hi, axis) -> list[Coord]:
    return [q for q in s.gamma.sites() if lo <= q[axis] < hi]


def _restrict_layers(circ: LatticeCircuit, keep_ids, axis: int, delta: int, new_dims):
    layers = []
    for t, layer in enumerate(circ.layers):
        kept = []
        for gi, g in enumerate(layer):
            if (t, gi) in keep_ids:
                qs = tuple(
                    tuple(c + delta if k == axis else c for k, c in enumerate(q))
                    for q in g.qubits
                )
                kept.append(Gate(g.matrix, qs, name=g.name))
        layers.append(tuple(kept))
    return LatticeCircuit(tuple(new_dims), circ.depth, tuple(layers))


@dataclass(eq=False)
class CutData:
    """Everything the algorithms need about one cut of one synthesis."""

    slice_: Slice
    band: tuple[Coord, ...]
    front_sites: tuple[Coord, ...]
    weight: float  # trace of the cut state
    kappa: float
    eigvals: np.ndarray  # nonzero spectrum of the cut state (descending)
    kept: np.ndarray  # boolean mask of eigenvalues above tau
    e_residual: float  # 1 - weight (slice residual)
    g_residual: float  # spectral mass dropped by the projector
    left_op: np.ndarray  # band PSD operator for the left child (pre-sqrt)
    right_input: np.ndarray  # band PSD input state for the right child
    gram_vectors: np.ndarray  # eigenvectors of the band Gram (columns)
    amat: np.ndarray  # W sqrt(omega) columns on the front sites
    calculus: CutCalculus = field(default=CutCalculus())

    def projector_factors(self) -> tuple[np.ndarray, np.ndarray]:
        """(factors, coeffs) of the front-side cut operator Pi (or (rho/kappa)^2K)."""
        mu = self.eigvals
        if self.calculus.mode == "exact-spectral":
            idx = np.nonzero(self.kept)[0]
            coeffs = np.ones(len(idx))
        else:
            idx = np.nonzero(mu > 0)[0]
            coeffs = (mu[idx] / self.kappa) ** (2 * self.calculus.K)
        cols = []
        for j in idx:
            cols.append(self.amat @ self.gram_vectors[:, j] / np.sqrt(mu[j]))
        factors = np.stack(cols, axis=1) if cols else np.zeros((self.amat.shape[0], 0))
        return factors, coeffs


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def kappa_from_spectrum(eigvals, T: int) -> float:
    """(sum_j mu_j^{2T})^{1/(2T)} -- the normalization scale of a cut state."""
    mu = np.clip(np.asarray(eigvals, dtype=float), 0.0, None)
    if T < 1:
        raise ValueError("T must be >= 1")
    total = float(np.sum(mu ** (2 * T)))
    if total <= 0.0:
        raise CutError("non-heavy slice: cut state has zero trace")
    return total ** (1.0 / (2 * T))


def causal_split(s: Synthesis, sl: Slice):
    """Partition gates at a slice: (left gate ids, cone gate ids, band sites).

    Cone gates are the forward light cone of the front region; the circuit
    equals (cone gates, in layer order) applied after (remaining gates).
    The cone acts only on the band (last d sites of the slice) and the front.
    """
    d = s.gamma.depth
    if sl.width < 2 * d:
        raise CutError(
            f"insufficient light-cone separation: slice width {sl.width} < 2d = {2 * d}"
        )
    axis = sl.axis
    front = _axis_filter(s, sl.hi, s.gamma.dims[axis], axis)
    band = _axis_filter(s, sl.hi - d, sl.hi, axis)
    cone, reached = cone_gates(s.gamma, front, "forward")
    allowed = set(front) | set(band)
    if not set(reached) <= allowed:
        raise AssertionError("light cone of the front escaped its band")
    all_ids = {(t, gi) for t, layer in enumerate(s.gamma.layers) for gi in range(len(layer))}
    return all_ids - cone, cone, tuple(band)


def _partition_ops(s: Synthesis, sl: Slice):
    left_ops, right_ops = [], []
    for op in s.cut_ops:
        xs = [q[sl.axis] for q in op.qubits] + [q[sl.axis] for q in op.project_zero]
        if max(xs) < sl.lo:
            left_ops.append(op)
        elif min(xs) >= sl.hi - s.gamma.depth:
            right_ops.append(op)
        else:
            raise SplitError(f"cut operator on {op.qubits} straddles the slice")
    return left_ops, right_ops


def _role(s: Synthesis, q: Coord) -> str:
    if q in set(s.M):
        return "M"
    if q in set(s.L):
        return "L"
    return "N"


def cut_data(s: Synthesis, sl: Slice, calc: CutCalculus, cap: int = oracle.DEFAULT_CAP) -> CutData:
    """Spectral data of the cut state at `sl` (conditioned behind, traced over
    the back region, band-factored in front)."""
    axis = sl.axis
    left_ids, cone_ids, band = causal_split(s, sl)
    left_ops, right_ops = _partition_ops(s, sl)
    roles = {q: _role(s, q) for q in s.gamma.sites()}

    # --- band state omega: evolve the left gates, condition the slice's back
    # half (and any left M sites) on zero, trace everything else.
    left_sites = _axis_filter(s, 0, sl.hi, axis)
    left_circ = _restrict_layers(
        s.gamma,
        left_ids,
        axis,
        0,
        tuple(sl.hi if k == axis else w for k, w in enumerate(s.gamma.dims)),
    )
    left_view = Synthesis(
        gamma=left_circ,
        L=tuple(q for q in left_sites if roles[q] == "L"),
        M=tuple(q for q in left_sites if roles[q] == "M"),
        N=tuple(q for q in left_sites if roles[q] == "N"),
        declared_axes=s.declared_axes,
        cut_ops=tuple(left_ops),
    )
    psi, qubits, index = oracle.synthesis_state(left_view, cap=cap)
    n = len(qubits)
    for op in left_ops:
        if op.kind == "sandwich":
            axes = [index[q] for q in op.qubits]
            if op.factors is not None:
                psi = oracle.apply_lowrank_vec(psi, op.factors, op.coeffs, axes, n)
            else:
                psi = oracle.apply_operator_vec(psi, op.matrix, axes, n)
        elif op.kind == "insertion":
            raise SplitError("cannot split through a synthesis with insertion operators")
    # condition on zeros: back half of the slice plus any M-roled left site
    m_back = [q for q in left_sites if sl.lo <= q[axis] < sl.hi - s.gamma.depth]
    cond = sorted(
        {index[q] for q in m_back} | {index[q] for q in left_view.M}
    )
    t = psi.reshape([2] * n)
    for a in sorted(cond, reverse=True):
        t = np.take(t, 0, axis=a)
    remaining = [q for i, q in enumerate(qubits) if i not in cond]
    band_axes = [remaining.index(q) for q in band]
    omega = oracle.reduce_vec(t.reshape(-1), band_axes, len(remaining))

    # --- front contraction W: evolve each band basis state through the cone
    # gates, apply front-side annotations, project the band to zero.
    front = _axis_filter(s, sl.hi, s.gamma.dims[axis], axis)
    right_sites = list(band) + front
    oracle._check_cap(len(right_sites), cap)
    ridx = {q: i for i, q in enumerate(right_sites)}
    nb, nr = len(band), len(right_sites)
    cone_gate_list = [
        (t_, g) for t_, layer in enumerate(s.gamma.layers) for gi, g in enumerate(layer)
        if (t_, gi) in cone_ids
    ]
    wcols = np.zeros((2 ** len(front), 2**nb), dtype=complex)
    for x in range(2**nb):
        col = np.zeros(2**nr, dtype=complex)
        col[x << len(front)] = 1.0  # band axes are the leading axes
        for _, g in cone_gate_list:
            col = oracle.apply_gate_vec(col, g.matrix, [ridx[q] for q in g.qubits], nr)
        for op in right_ops:
            if op.kind == "sandwich":
                axes = [ridx[q] for q in op.qubits]
                if op.factors is not None:
                    col = oracle.apply_lowrank_vec(col, op.factors, op.coeffs, axes, nr)
                else:
                    col = oracle.apply_operator_vec(col, op.matrix, axes, nr)
        t_ = col.reshape([2] * nr)
        for a in range(nb):
            t_ = np.take(t_, 0, axis=0)
        wcols[:, x] = t_.reshape(-1)

    m_omega = _psd_sqrt(omega)
    amat = wcols @ m_omega
    gram = amat.conj().T @ amat
    gram = 0.5 * (gram + gram.conj().T)
    mu, gv = np.linalg.eigh(gram)
    order = np.argsort(mu)[::-1]
    mu, gv = np.clip(mu[order], 0.0, None), gv[:, order]
    weight = float(mu.sum())
    if weight <= 0.0:
        raise CutError("non-heavy slice: cut state has zero trace")
    kept = mu > calc.tau
    if not kept.any():
        kept = np.zeros_like(mu, dtype=bool)
        kept[0] = True
    kap = kappa_from_spectrum(mu, calc.T)

    K = calc.K
    wtw = wcols.conj().T @ wcols
    if calc.mode == "exact-spectral":
        # left operator  kappa^2K * W^dag Pi W,  Pi the kept eigenprojector
        p_tilde = sum(
            np.outer(gv[:, j], gv[:, j].conj()) / mu[j] for j in np.nonzero(kept)[0]
        )
        left_op = (kap ** (2 * K)) * (wtw @ m_omega) @ p_tilde @ (m_omega @ wtw)
        # right input  kappa^2K * sqrt(omega) P1 sqrt(omega),  W . W^dag = Pi rho Pi
        p1 = sum(np.outer(gv[:, j], gv[:, j].conj()) for j in np.nonzero(kept)[0])
        right_input = (kap ** (2 * K)) * m_omega @ p1 @ m_omega
    else:
        # literal powers: left W^dag rho^2K W, right sqrt(omega) G^2K sqrt(omega)
        gpow = (gv * mu ** (2 * K - 1)) @ gv.conj().T
        left_op = (wtw @ m_omega) @ gpow @ (m_omega @ wtw)
        g2k = (gv * mu ** (2 * K)) @ gv.conj().T
        right_input = m_omega @ g2k @ m_omega
    left_op = 0.5 * (left_op + left_op.conj().T)
    right_input = 0.5 * (right_input + right_input.conj().T)

    g_res = float(mu[~kept].sum()) if calc.mode == "exact-spectral" else 0.0
    return CutData(
        slice_=sl,
        band=band,
        front_sites=tuple(front),
        weight=weight,
        kappa=kap,
        eigvals=mu,
        kept=kept,
        e_residual=max(0.0, 1.0 - weight),
        g_residual=g_res,
        left_op=left_op,
        right_input=right_input,
        gram_vectors=gv,
        amat=amat,
        calculus=calc,
    )


def slice_weight(s: Synthesis, sl: Slice, cap: int = oracle.DEFAULT_CAP) -> float:
    """tr <0_{M_slice}| phi |0_{M_slice}> -- the post-selected slice weight."""
    slice_sites = _axis_filter(s, sl.lo, sl.hi, sl.axis)
    roles = {}
    for q in s.gamma.sites():
        if q in set(slice_sites):
            roles[q] = "M"
        else:
            roles[q] = "L"
    view = Synthesis(
        gamma=s.gamma,
        L=tuple(q for q in s.gamma.sites() if roles[q] == "L"),
        M=tuple(slice_sites),
        N=(),
        declared_axes=s.declared_axes,
        cut_ops=s.cut_ops,
    )
    return oracle.synthesis_value_exact(view, cap=cap)


def kappa(s: Synthesis, sl: Slice, T: int, eps: float, calc: CutCalculus | None = None,
          cap: int = oracle.DEFAULT_CAP) -> float:
    """Normalization constant (tr rho^{2T})^{1/(2T)} of the cut state at `sl`."""
    if T < 1:
        raise ValueError("T must be >= 1")
    base = calc or CutCalculus()
    data = cut_data(s, sl, replace(base, T=T), cap=cap)
    return data.kappa


def cut_projector(
    s: Synthesis,
    sl: Slice,
    calc: CutCalculus,
    cap: int = oracle.DEFAULT_CAP,
    via: str = "auto",
) -> np.ndarray:
    """Dense front-side cut operator.

    exact-spectral: orthogonal projector onto eigenvectors of the cut state
    with eigenvalue > tau.  power-encoding: (rho/kappa)^{2K}; when the circuit
    plus the block-encoding register copies fit the dense cap (and `via` is
    not "dense") the operator is extracted from the literal power encoding,
    otherwise it is computed from the spectral form (the two agree; the
    equality is asserted in the block-encoding tests).
    """
    data = cut_data(s, sl, calc, cap=cap)
    oracle._check_cap(2 * len(data.front_sites), cap)  # dense 2^|F| x 2^|F| output
    if calc.mode == "power-encoding" and via in ("auto", "encoding"):
        from . import blockenc
        from .geomcircuit import cut_regions

        k = 2 * calc.K
        try:
            if s.cut_ops:
                raise CutError("encoding extraction needs a plain synthesis")
            regions = cut_regions(s.gamma, sl)
            enc = blockenc.build_rho_power_encoding(s.gamma, regions, k, side="F")
            block = blockenc.encoding_block(enc, cap=cap)
            return block / data.kappa**k
        except (oracle.OracleCapacityError, CutError, ValueError):
            if via == "encoding":
                raise
    factors, coeffs = data.projector_factors()
    return (factors * coeffs) @ factors.conj().T


def insertion_op(s: Synthesis, sl: Slice, calc: CutCalculus, cap: int = oracle.DEFAULT_CAP) -> CutOp:
    """|0><0| on the slice then the cut operator on the front, as a CutOp."""
    data = cut_data(s, sl, calc, cap=cap)
    factors, coeffs = data.projector_factors()
    slice_sites = tuple(_axis_filter(s, sl.lo, sl.hi, sl.axis))
    return CutOp(
        kind="insertion",
        qubits=data.front_sites,
        factors=factors,
        coeffs=coeffs,
        project_zero=slice_sites,
    )


def inserted_value(
    s: Synthesis, slices: list[Slice], calc: CutCalculus, cap: int = oracle.DEFAULT_CAP
) -> float:
    """Value of s with cut operators inserted at `slices` (rightmost first).

    This is the reference decomposition the signed combination approximates;
    each insertion's projector is computed in the context of the plain s.
    """
    ops = [insertion_op(s, sl, calc, cap=cap) for sl in sorted(slices, key=lambda x: -x.lo)]
    annotated = replace(s, cut_ops=s.cut_ops + tuple(ops))
    return oracle.synthesis_value_exact(annotated, cap=cap)


# ---------------------------------------------------------------------------
# sub-synthesis construction
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PhiDescriptor:
    """Middle-segment synthesis with cut-operator annotations on both ends."""

    middle: Synthesis
    left_slice: Slice
    right_slice: Slice

    def with_insertions(self, slices, calc: CutCalculus, cap: int = oracle.DEFAULT_CAP) -> Synthesis:
        ops = [
            insertion_op(self.middle, sl, calc, cap=cap)
            for sl in sorted(slices, key=lambda x: -x.lo)
        ]
        return replace(self.middle, cut_ops=self.middle.cut_ops + tuple(ops))


@dataclass(frozen=True, eq=False)
class SplitResult:
    left: Synthesis
    middle: Synthesis | None
    right: Synthesis
    phi: PhiDescriptor | None
    left_data: CutData
    right_data: CutData


def _shift_slice(sl: Slice, delta: int) -> Slice:
    return Slice(sl.axis, sl.lo + delta, sl.hi + delta)


def _left_child(s: Synthesis, sl: Slice, data: CutData, left_ids, left_ops) -> Synthesis:
    axis = sl.axis
    dims = tuple(sl.hi if k == axis else w for k, w in enumerate(s.gamma.dims))
    circ = _restrict_layers(s.gamma, left_ids, axis, 0, dims)
    sites = set(circ.sites())
    band = set(data.band)
    roles = {q: _role(s, q) for q in sites}
    sandwich = CutOp(kind="sandwich", qubits=data.band, matrix=_psd_sqrt(data.left_op))
    return Synthesis(
        gamma=circ,
        L=tuple(q for q in circ.sites() if roles[q] == "L" or q in band),
        M=tuple(q for q in circ.sites() if roles[q] == "M" and q not in band),
        N=tuple(q for q in circ.sites() if roles[q] == "N" and q not in band),
        declared_axes=s.declared_axes,
        thickness=s.thickness,
        cut_ops=tuple(left_ops) + (sandwich,),
        origin=s.origin,
    )


def _right_child(s: Synthesis, sl: Slice, data: CutData, cone_ids, right_ops) -> Synthesis:
    axis = sl.axis
    delta = -sl.lo
    dims = tuple(
        s.gamma.dims[axis] - sl.lo if k == axis else w for k, w in enumerate(s.gamma.dims)
    )
    circ = _restrict_layers(s.gamma, cone_ids, axis, delta, dims)
    shift = lambda q: tuple(c + delta if k == axis else c for k, c in enumerate(q))
    band = {shift(q) for q in data.band}
    roles = {shift(q): _role(s, q) for q in s.gamma.sites() if q[axis] >= sl.lo}
    ops = [op.shifted(axis, delta) for op in right_ops]
    ops.append(
        CutOp(
            kind="input_state",
            qubits=tuple(sorted(band)),
            matrix=data.right_input,
        )
    )
    origin = tuple(
        o + sl.lo if k == axis else o for k, o in enumerate(s.origin or (0,) * len(s.gamma.dims))
    )
    return Synthesis(
        gamma=circ,
        L=tuple(q for q in circ.sites() if roles[q] == "L" and q not in band),
        M=tuple(q for q in circ.sites() if roles[q] == "M" or q in band),
        N=tuple(q for q in circ.sites() if roles[q] == "N" and q not in band),
        declared_axes=s.declared_axes,
        thickness=s.thickness,
        cut_ops=tuple(ops),
        origin=origin,
    )


def _middle_child(s, i: Slice, j: Slice, data_i: CutData, data_j: CutData, cone_i, cone_j) -> Synthesis:
    axis = i.axis
    delta = -i.lo
    dims = tuple(j.hi - i.lo if k == axis else w for k, w in enumerate(s.gamma.dims))
    circ = _restrict_layers(s.gamma, cone_i - cone_j, axis, delta, dims)
    shift = lambda q: tuple(c + delta if k == axis else c for k, c in enumerate(q))
    band_i = {shift(q) for q in data_i.band}
    band_j = {shift(q) for q in data_j.band}
    roles = {
        shift(q): _role(s, q) for q in s.gamma.sites() if i.lo <= q[axis] < j.hi
    }
    ops = [
        CutOp(kind="input_state", qubits=tuple(sorted(band_i)), matrix=data_i.right_input),
        CutOp(
            kind="sandwich",
            qubits=tuple(sorted(band_j)),
            matrix=_psd_sqrt(data_j.left_op),
        ),
    ]
    origin = tuple(
        o + i.lo if k == axis else o for k, o in enumerate(s.origin or (0,) * len(s.gamma.dims))
    )
    return Synthesis(
        gamma=circ,
        L=tuple(q for q in circ.sites() if (roles[q] == "L" and q not in band_i) or q in band_j),
        M=tuple(
            q
            for q in circ.sites()
            if (roles[q] == "M" and q not in band_j) or (q in band_i and q not in band_j)
        ),
        N=tuple(
            q
            for q in circ.sites()
            if roles[q] == "N" and q not in band_i and q not in band_j
        ),
        declared_axes=s.declared_axes,
        thickness=s.thickness,
        cut_ops=tuple(ops),
        origin=origin,
    )


def split_at_cuts(
    s: Synthesis,
    i: Slice,
    j: Slice | None,
    calc: CutCalculus,
    cap: int = oracle.DEFAULT_CAP,
    data_i: CutData | None = None,
    data_j: CutData | None = None,
) -> SplitResult:
    """Cut `s` at slice i (and optionally a second slice j to its right).

    Returns the left sub-synthesis (ending at cut i), the middle segment
    between the cuts with cut-operator annotations on both ends (two-cut form
    only), and the right sub-synthesis (starting at cut i or j).
    """
    axis = i.axis
    if not (0 <= i.lo and i.hi <= s.gamma.dims[axis]):
        raise SplitError("slice i outside the synthesis lattice")
    if j is not None:
        if j.axis != axis:
            raise SplitError("slices must share an axis")
        if j.lo < i.hi:
            raise SplitError("slices overlap or j is not right of i")
        if j.hi > s.gamma.dims[axis]:
            raise SplitError("slice j outside the synthesis lattice")
        for op in s.cut_ops:
            xs = [q[axis] for q in op.qubits] + [q[axis] for q in op.project_zero]
            if min(xs) >= i.hi - s.gamma.depth and max(xs) < j.lo:
                raise SplitError("cut operator inside the middle segment")

    left_ids_i, cone_i, _ = causal_split(s, i)
    left_ops_i, right_ops_i = _partition_ops(s, i)
    if data_i is None:
        data_i = cut_data(s, i, calc, cap=cap)
    left = _left_child(s, i, data_i, left_ids_i, left_ops_i)

    if j is None:
        right = _right_child(s, i, data_i, cone_i, right_ops_i)
        return SplitResult(left, None, right, None, data_i, data_i)

    left_ids_j, cone_j, _ = causal_split(s, j)
    _, right_ops_j = _partition_ops(s, j)
    if data_j is None:
        data_j = cut_data(s, j, calc, cap=cap)
    right = _right_child(s, j, data_j, cone_j, right_ops_j)
    middle = _middle_child(s, i, j, data_i, data_j, cone_i, cone_j)
    phi = PhiDescriptor(middle=middle, left_slice=_shift_slice(i, -i.lo), right_slice=_shift_slice(j, -i.lo))
    return SplitResult(left, middle, right, phi, data_i, data_j)
