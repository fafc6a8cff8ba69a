"""Divide-and-conquer estimator.

`a_full` is the driver: it handles the error-parameter edge cases, enumerates
candidate slices along the widest declared axis, classifies heavy slices via
lower-dimensional weight estimates, and hands off to the recursive subroutine
`a_recursive`, which cuts the lattice at heavy slices inside a central region
and combines recursively-estimated sub-synthesis values by signed
inclusion-exclusion.

Every run can be instrumented with a RecursionTrace whose per-node child
counts are deterministic functions of the schedule and lattice geometry
(see expected_node_counts).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import errmodel, oracle
from .geomcircuit import Slice, cone_gates, enumerate_slices
from .synthesis import (
    CutCalculus,
    CutOp,
    SplitError,
    Synthesis,
    cut_data,
    split_at_cuts,
    _restrict_layers,
)


class ScheduleError(ValueError):
    pass


class SpacingError(RuntimeError):
    """The slice-spacing guarantee failed: fewer than Delta heavy slices in Z."""


@dataclass(frozen=True)
class ParameterSchedule:
    """All scalar knobs of the estimator.

    Paper profile derives every field from (n, d, D, delta); the desk profile
    starts from small validated defaults and accepts overrides.  `h` drives
    the heavy-slice thresholds 2^(log delta / h); `h_margin` is the allowed
    number of non-heavy slices (the paper couples both roles in one h(n)).
    """

    delta: float
    eps: float
    h: float
    h_margin: int
    eta: int
    Delta: int
    K: int
    T: int
    w0: int
    z_width: int
    slice_width: int
    max_gap: int
    d: int
    profile: str

    def __post_init__(self):
        if self.eps > self.delta + 1e-15:
            raise ScheduleError("eps must not exceed delta")
        if self.slice_width < 2 * self.d:
            raise ScheduleError(
                f"slice_width {self.slice_width} below minimum 2d = {2 * self.d}"
            )
        if self.Delta < 1:
            raise ScheduleError("Delta must be >= 1")
        if self.K < 1 or self.T < 1:
            raise ScheduleError("K and T must be >= 1")
        if self.h < 1:
            raise ScheduleError("h must be >= 1")

    def heavy_thresholds(self) -> tuple[float, float]:
        """(lower, upper) slice-weight thresholds 2^(log d / h), 2^(log d / 2h)."""
        l = math.log2(self.delta)
        return 2.0 ** (l / self.h), 2.0 ** (l / (2 * self.h))


def schedule(n: int, d: int, D: int, delta: float, profile: str = "paper", **overrides) -> ParameterSchedule:
    """Derive the parameter schedule for an n-qubit, depth-d, D-dimensional run."""
    if n < 2 or d < 1 or D < 2 or delta <= 0:
        raise ScheduleError("require n >= 2, d >= 1, D >= 2, delta > 0")
    ln = math.log2(n)
    eps = delta * 2.0 ** (-10.0 * ln * math.log2(max(ln, 1.0)))
    if profile == "paper":
        h = math.ceil(ln**7)
        Delta = math.ceil(ln)
        fields = dict(
            delta=delta,
            eps=eps,
            h=h,
            h_margin=h,
            eta=math.ceil(ln / (D * math.log2(4.0 / 3.0))),
            Delta=Delta,
            K=math.ceil(ln**3),
            T=math.ceil(ln**3),
            w0=20 * d * (Delta + h + 2),
            z_width=10 * d * (Delta + h + 2),
            slice_width=10 * d,
            max_gap=10 * d,
            d=d,
            profile="paper",
        )
    elif profile == "desk":
        Delta = int(overrides.get("Delta", 2))
        slice_width = int(overrides.get("slice_width", 2 * d))
        max_gap = int(overrides.get("max_gap", 2 * d))
        # wide enough that Delta whole slices fit regardless of tiling alignment
        z_width = int(
            overrides.get("z_width", Delta * (slice_width + max_gap) + slice_width)
        )
        fields = dict(
            delta=delta,
            eps=eps,
            h=4,
            h_margin=1,
            eta=2,
            Delta=Delta,
            K=2,
            T=2,
            w0=z_width + slice_width + 1,
            z_width=z_width,
            slice_width=slice_width,
            max_gap=max_gap,
            d=d,
            profile="desk",
        )
    else:
        raise ScheduleError(f"unknown profile {profile!r}")
    fields.update({k: v for k, v in overrides.items() if k in fields})
    return ParameterSchedule(**fields)


# ---------------------------------------------------------------------------
# recursion trace
# ---------------------------------------------------------------------------


@dataclass
class TraceNode:
    kind: str
    meta: dict = field(default_factory=dict)
    value: float | None = None
    children: list["TraceNode"] = field(default_factory=list)

    def add(self, kind: str, **meta) -> "TraceNode":
        node = TraceNode(kind, meta)
        self.children.append(node)
        return node

    def count(self, kind: str) -> int:
        return sum(1 for c in self.children if c.kind == kind)

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()

    def counts_by_kind(self) -> dict:
        out: dict[str, int] = {}
        for node in self.walk():
            out[node.kind] = out.get(node.kind, 0) + 1
        return out

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "meta": {k: _jsonable(v) for k, v in self.meta.items()},
            "value": self.value,
            "children": [c.to_dict() for c in self.children],
        }


RecursionTrace = TraceNode


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, Slice):
        return {"axis": v.axis, "lo": v.lo, "hi": v.hi}
    if isinstance(v, (tuple, list)):
        return [_jsonable(x) for x in v]
    return v


@dataclass
class DncConfig:
    base: object = None
    calc: CutCalculus = field(default_factory=CutCalculus)
    profile: str = "desk"
    overrides: dict = field(default_factory=dict)
    cap: int = oracle.DEFAULT_CAP

    def __post_init__(self):
        if self.base is None:
            self.base = oracle.base_exact


# ---------------------------------------------------------------------------
# structural helpers
# ---------------------------------------------------------------------------


def widest_axis(s: Synthesis) -> int:
    return min(s.declared_axes, key=lambda a: (-s.gamma.dims[a], a))


def dimension_reduce(s: Synthesis, axis: int | None = None) -> Synthesis:
    """Absorb one declared axis into the site structure (value unchanged).

    The circuit, registers, and annotations are untouched; only the declared
    dimensionality shrinks, with the absorbed width appended to the thickness
    ledger.
    """
    if axis is None:
        axis = widest_axis(s)
    if axis not in s.declared_axes:
        raise ValueError(f"axis {axis} is not a declared dimension")
    if len(s.declared_axes) < 2:
        raise ValueError("cannot reduce below one declared dimension")
    return replace(
        s,
        declared_axes=tuple(a for a in s.declared_axes if a != axis),
        thickness=s.thickness + (s.gamma.dims[axis],),
    )


def slice_weight_synthesis(s: Synthesis, sl: Slice) -> Synthesis:
    """The slice-weight quantity tr <0_M| phi |0_M> as a slab-restricted synthesis.

    Only gates in the backward light cone of the slice matter, so the circuit
    is restricted to a slab of thickness |slice| + 2d around it; the slice is
    the M register, the rest of the slab is traced, and N is empty.
    """
    d = s.gamma.depth
    axis = sl.axis
    slab_lo = max(0, sl.lo - d)
    slab_hi = min(s.gamma.dims[axis], sl.hi + d)
    slice_sites = [q for q in s.gamma.sites() if sl.lo <= q[axis] < sl.hi]
    cone, reached = cone_gates(s.gamma, slice_sites, "backward")
    if any(q[axis] < slab_lo or q[axis] >= slab_hi for q in reached):
        raise AssertionError("backward cone of the slice escaped its slab")
    dims = tuple(slab_hi - slab_lo if k == axis else w for k, w in enumerate(s.gamma.dims))
    circ = _restrict_layers(s.gamma, cone, axis, -slab_lo, dims)
    kept_ops = []
    for op in s.cut_ops:
        xs = [q[axis] for q in op.qubits] + [q[axis] for q in op.project_zero]
        if max(xs) < slab_lo or min(xs) >= slab_hi:
            if op.kind == "sandwich" or op.kind == "insertion":
                raise SplitError("slice weight undefined with off-slab sandwich operators")
            continue
        if min(xs) >= slab_lo and max(xs) < slab_hi:
            kept_ops.append(op.shifted(axis, -slab_lo))
        else:
            raise SplitError(f"cut operator on {op.qubits} straddles the slab")
    shift = lambda q: tuple(c - slab_lo if k == axis else c for k, c in enumerate(q))
    m_sites = {shift(q) for q in slice_sites}
    return Synthesis(
        gamma=circ,
        L=tuple(q for q in circ.sites() if q not in m_sites),
        M=tuple(sorted(m_sites)),
        N=(),
        declared_axes=s.declared_axes,
        thickness=s.thickness,
        cut_ops=tuple(kept_ops),
        origin=s.origin,
    )


def select_region_Z(s: Synthesis, sched: ParameterSchedule, K_heavy: list[Slice]):
    """Central sub-hyper-cube Z and the Delta left-most heavy slices inside it."""
    axis = K_heavy[0].axis
    length = s.gamma.dims[axis]
    z = min(sched.z_width, length)
    lo = (length - z) // 2
    hi = lo + z
    region = Slice(axis, lo, hi)
    chosen = [sl for sl in sorted(K_heavy, key=lambda x: x.lo) if sl.lo >= lo and sl.hi <= hi]
    if len(chosen) < sched.Delta:
        raise SpacingError(
            f"fewer than Delta = {sched.Delta} heavy slices lie fully inside the "
            f"central region Z = [{lo},{hi}); the spacing precondition (collective "
            f"width between Delta slices at most 10d(Delta + h)) is violated"
        )
    return region, chosen[: sched.Delta]


def inclusion_exclusion_combine(single, double, multi, kappas, K: int, Delta: int) -> float:
    """Signed combination of sub-synthesis products.

    single[i-1]        product for cut i                    (i = 1..Delta)
    double[(i, j)]     product for cuts i < j
    multi[(i, j, sigma)]  product for cuts i, j >= i+2 and nonempty sigma,
                       sigma a tuple of indices in {i+1, .., j-1}
    Coefficients 1/kappa_i^(4K+1) and 1/(kappa_i kappa_j)^(4K+1); sigma terms
    carry sign (-1)^(|sigma|+1).
    """
    if len(single) != Delta or len(kappas) != Delta:
        raise KeyError("missing sub-value keys: need one single product and kappa per cut")
    p = 4 * K + 1
    total = 0.0
    for i in range(1, Delta + 1):
        if kappas[i - 1] <= 0:
            raise ValueError("kappas must be positive")
        total += single[i - 1] / kappas[i - 1] ** p
    for i in range(1, Delta + 1):
        for j in range(i + 1, Delta + 1):
            if (i, j) not in double:
                raise KeyError(f"missing sub-value keys: double term {(i, j)}")
            total -= double[(i, j)] / (kappas[i - 1] * kappas[j - 1]) ** p
    for i in range(1, Delta + 1):
        for j in range(i + 2, Delta + 1):
            for sigma in nonempty_subsets(range(i + 1, j)):
                if (i, j, sigma) not in multi:
                    raise KeyError(f"missing sub-value keys: multi term {(i, j, sigma)}")
                sign = (-1.0) ** (len(sigma) + 1)
                total += sign * multi[(i, j, sigma)] / (kappas[i - 1] * kappas[j - 1]) ** p
    return total


def nonempty_subsets(indices) -> list[tuple[int, ...]]:
    """All nonempty subsets of `indices`, lexicographically ordered."""
    idx = list(indices)
    out = []
    for mask in range(1, 2 ** len(idx)):
        out.append(tuple(idx[k] for k in range(len(idx)) if mask >> k & 1))
    return sorted(out)


# ---------------------------------------------------------------------------
# the estimator
# ---------------------------------------------------------------------------


def _brute_cutoff(n: int) -> float:
    return float(n) ** -(math.log2(n) ** 2)


def heavy_slices(
    s: Synthesis,
    slices: list[Slice],
    sched: ParameterSchedule,
    subsolver,
    trace: TraceNode | None = None,
) -> tuple[list[Slice], bool]:
    """Classify slices as heavy via estimated post-selected weights.

    A slice is heavy when its weight estimate clears the midpoint of the two
    thresholds 2^(log d / 2h) and 2^(log d / h); the estimation error margin
    e1(delta, h) is exactly half their gap, so this separates the two cases.
    `enough` requires all but h_margin slices to be heavy (at least one).
    """
    lo_thr, hi_thr = sched.heavy_thresholds()
    midpoint = 0.5 * (lo_thr + hi_thr)
    err = errmodel.e1(sched.delta, sched.h)
    heavy = []
    for sl in slices:
        wsyn = slice_weight_synthesis(s, sl)
        est = subsolver(wsyn, err)
        if trace is not None:
            node = trace.add("slice_weight", slice=sl, estimate=est, midpoint=midpoint)
            node.value = est
        if est >= midpoint:
            heavy.append(sl)
    enough = len(heavy) >= max(1, len(slices) - sched.h_margin)
    return heavy, enough


def a_full(
    s: Synthesis,
    base,
    delta: float,
    D: int,
    config: DncConfig | None = None,
    sched: ParameterSchedule | None = None,
    trace: TraceNode | None = None,
) -> float:
    """Driver: delta edge cases, heavy-slice scan, dispatch to the recursion."""
    cfg = config or DncConfig(base=base)
    if base is None:
        base = cfg.base
    n = s.gamma.n_qubits
    node = trace.add("a_full", dims=s.declared_dims, D=D, delta=delta) if trace is not None else None

    if delta <= _brute_cutoff(n):
        val = oracle.synthesis_value_exact(s, cap=cfg.cap)
        if node is not None:
            node.add("brute_force").value = val
            node.value = val
        return val
    if delta >= 0.5:
        if node is not None:
            node.add("return_half").value = 0.5
            node.value = 0.5
        return 0.5
    if D == 2:
        val = base(s, delta)
        if node is not None:
            node.add("base").value = val
            node.value = val
        return val

    if sched is None:
        sched = schedule(n, s.gamma.depth, D, delta, cfg.profile, **cfg.overrides)
    axis = widest_axis(s)
    slices = enumerate_slices(s.gamma, axis, sched.slice_width, sched.max_gap)
    if not slices:
        reduced = dimension_reduce(s, axis)
        val = a_full(reduced, base, delta, D - 1, cfg, None, node)
        if node is not None:
            node.value = val
        return val

    def subsolver(wsyn: Synthesis, err: float) -> float:
        reduced = dimension_reduce(wsyn, axis)
        return a_full(reduced, base, err, D - 1, cfg, None, node)

    K_heavy, enough = heavy_slices(s, slices, sched, subsolver, trace=node)
    if not enough:
        if node is not None:
            node.add("none_heavy").value = 0.0
            node.value = 0.0
        return 0.0
    val = a_recursive(s, sched, K_heavy, D, base, config=cfg, trace=node)
    if node is not None:
        node.value = val
    return val


def _localize(K_heavy: list[Slice], s: Synthesis, axis: int) -> list[Slice]:
    """Translate absolute heavy slices into s's frame, keeping those inside."""
    off = s.origin[axis] if s.origin else 0
    length = s.gamma.dims[axis]
    out = []
    for sl in K_heavy:
        lo, hi = sl.lo - off, sl.hi - off
        if lo >= 0 and hi <= length:
            out.append(Slice(axis, lo, hi))
    return out


def _absolute(sl: Slice, s: Synthesis) -> Slice:
    off = s.origin[sl.axis] if s.origin else 0
    return Slice(sl.axis, sl.lo + off, sl.hi + off)


def a_recursive(
    s: Synthesis,
    sched: ParameterSchedule,
    K_heavy: list[Slice],
    D: int,
    base,
    eta: int | None = None,
    config: DncConfig | None = None,
    trace: TraceNode | None = None,
) -> float:
    """Recursive subroutine: cut at Delta heavy slices in the central region
    and combine sub-synthesis estimates by signed inclusion-exclusion.

    K_heavy is given in absolute (top-level) coordinates.
    """
    cfg = config or DncConfig(base=base)
    if base is None:
        base = cfg.base
    if eta is None:
        eta = sched.eta
    if not K_heavy:
        raise SpacingError("K_heavy is empty")
    axis = K_heavy[0].axis
    length = s.gamma.dims[axis]
    node = (
        trace.add("a_recursive", width=length, eta=eta, D=D, dims=s.declared_dims)
        if trace is not None
        else None
    )

    if length < sched.w0 or eta < 1:
        reduced = dimension_reduce(s, axis)
        val = a_full(reduced, base, sched.eps, D - 1, cfg, None, node)
        if node is not None:
            node.meta["stopped"] = True
            node.value = val
        return val

    local = _localize(K_heavy, s, axis)
    if not local:
        raise SpacingError("no heavy slices lie inside this sub-synthesis")
    region, chosen = select_region_Z(s, sched, local)
    if node is not None:
        node.meta["region_Z"] = region
        node.meta["chosen"] = [c for c in chosen]

    calc = replace(cfg.calc, K=sched.K, T=sched.T)
    Delta = sched.Delta
    data = []
    for sl in chosen:
        cd = cut_data(s, sl, calc, cap=cfg.cap)
        data.append(cd)
        if node is not None:
            knode = node.add(
                "kappa",
                slice=sl,
                weight=cd.weight,
                e_residual=cd.e_residual,
                g_residual=cd.g_residual,
            )
            knode.value = cd.kappa

    vL: list[float] = []
    vR: list[float] = []
    splits = []
    for idx, sl in enumerate(chosen):
        sp = split_at_cuts(s, sl, None, calc, cap=cfg.cap, data_i=data[idx])
        splits.append(sp)
        lnode = node.add("left", slice=sl, parent_width=length, child_width=sp.left.gamma.dims[axis]) if node is not None else None
        vL.append(a_recursive(sp.left, sched, K_heavy, D, base, eta - 1, cfg, lnode))
        rnode = node.add("right", slice=sl, parent_width=length, child_width=sp.right.gamma.dims[axis]) if node is not None else None
        vR.append(a_recursive(sp.right, sched, K_heavy, D, base, eta - 1, cfg, rnode))
        if lnode is not None:
            lnode.value = vL[-1]
            rnode.value = vR[-1]

    single = [vL[i] * vR[i] for i in range(Delta)]
    double = {}
    phis = {}
    for i in range(Delta):
        for j in range(i + 1, Delta):
            sp = split_at_cuts(
                s, chosen[i], chosen[j], calc, cap=cfg.cap, data_i=data[i], data_j=data[j]
            )
            phis[(i, j)] = sp.phi
            mnode = node.add("middle", slices=(chosen[i], chosen[j])) if node is not None else None
            vM = a_full(sp.middle, base, sched.eps, D - 1, cfg, None, mnode)
            if mnode is not None:
                mnode.value = vM
            double[(i + 1, j + 1)] = vL[i] * vM * vR[j]

    multi = {}
    for i in range(Delta):
        for j in range(i + 2, Delta):
            for sigma in nonempty_subsets(range(i + 2, j + 1)):  # 1-based labels
                picked = [chosen[k - 1] for k in sigma]
                mid_lo = chosen[i].lo
                local_slices = [Slice(axis, sl.lo - mid_lo, sl.hi - mid_lo) for sl in picked]
                annotated = phis[(i, j)].with_insertions(local_slices, calc, cap=cfg.cap)
                snode = (
                    node.add("sigma_term", slices=(chosen[i], chosen[j]), sigma=sigma)
                    if node is not None
                    else None
                )
                val = a_full(annotated, base, errmodel.e3(sched.eps, Delta), D - 1, cfg, None, snode)
                if snode is not None:
                    snode.value = val
                multi[(i + 1, j + 1, sigma)] = vL[i] * val * vR[j]

    kappas = [cd.kappa for cd in data]
    total = inclusion_exclusion_combine(single, double, multi, kappas, sched.K, Delta)
    if node is not None:
        node.value = total
    return total


# ---------------------------------------------------------------------------
# trace conformance predictor
# ---------------------------------------------------------------------------


def expected_node_counts(
    dims: tuple[int, ...], d: int, D: int, sched: ParameterSchedule, delta: float
) -> dict:
    """Predicted per-kind trace node counts for an all-heavy run.

    Mirrors the driver/recursion control flow on interval geometry alone, so
    it is exact whenever every enumerated slice is classified heavy (identity
    and near-identity corpora).  Used to check runtime-predictor conformance
    against measured traces.
    """
    counts: dict[str, int] = {}

    def bump(kind, amount=1):
        counts[kind] = counts.get(kind, 0) + amount

    def slices_along(length):
        out = []
        lo = 0
        while lo + sched.slice_width <= length:
            out.append((lo, lo + sched.slice_width))
            lo += sched.slice_width + sched.max_gap
        return out

    def full(dims_, declared, D_, delta_):
        bump("a_full")
        n = int(np.prod(dims_))
        if delta_ <= _brute_cutoff(n):
            bump("brute_force")
            return
        if delta_ >= 0.5:
            bump("return_half")
            return
        if D_ == 2:
            bump("base")
            return
        axis = min(declared, key=lambda a: (-dims_[a], a))
        slc = slices_along(dims_[axis])
        if not slc:
            full(dims_, tuple(a for a in declared if a != axis), D_ - 1, delta_)
            return
        reduced = tuple(a for a in declared if a != axis)
        for lo, hi in slc:
            bump("slice_weight")
            slab_lo = max(0, lo - d)
            slab_hi = min(dims_[axis], hi + d)
            slab_dims = tuple(
                slab_hi - slab_lo if k == axis else w for k, w in enumerate(dims_)
            )
            full(slab_dims, reduced, D_ - 1, errmodel.e1(delta_, sched.h))
        recurse(dims_, declared, axis, slc, D_, sched.eta)

    def recurse(dims_, declared, axis, heavy, D_, eta):
        bump("a_recursive")
        length = dims_[axis]
        if length < sched.w0 or eta < 1:
            full(dims_, tuple(a for a in declared if a != axis), D_ - 1, sched.eps)
            return
        z = min(sched.z_width, length)
        zlo = (length - z) // 2
        zhi = zlo + z
        inside = [sl for sl in heavy if sl[0] >= zlo and sl[1] <= zhi]
        if len(inside) < sched.Delta:
            raise SpacingError("conformance predictor: too few heavy slices in Z")
        chosen = inside[: sched.Delta]
        bump("kappa", sched.Delta)
        for lo, hi in chosen:
            bump("left")
            left_dims = tuple(hi if k == axis else w for k, w in enumerate(dims_))
            sub_heavy = [sl for sl in heavy if sl[1] <= hi]
            recurse(left_dims, declared, axis, sub_heavy, D_, eta - 1)
            bump("right")
            right_dims = tuple(length - lo if k == axis else w for k, w in enumerate(dims_))
            sub_heavy = [(a - lo, b - lo) for a, b in heavy if a >= lo]
            recurse(right_dims, declared, axis, sub_heavy, D_, eta - 1)
        for i in range(sched.Delta):
            for j in range(i + 1, sched.Delta):
                bump("middle")
                mdims = tuple(
                    chosen[j][1] - chosen[i][0] if k == axis else w for k, w in enumerate(dims_)
                )
                full(mdims, declared, D_ - 1, sched.eps)
        for i in range(sched.Delta):
            for j in range(i + 2, sched.Delta):
                for _sigma in nonempty_subsets(range(i + 2, j + 1)):
                    bump("sigma_term")
                    mdims = tuple(
                        chosen[j][1] - chosen[i][0] if k == axis else w
                        for k, w in enumerate(dims_)
                    )
                    full(mdims, declared, D_ - 1, errmodel.e3(sched.eps, sched.Delta))

    full(tuple(dims), tuple(range(len(dims))), D, delta)
    return counts
