import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dncsim import dnc, errmodel, geomcircuit as gc, oracle, synthesis as syn
from dncsim.harness import generate_circuit


def make_synth(spec):
    circ = generate_circuit(spec)
    return syn.synthesis_of_circuit(circ), circ


# ---------------------------------------------------------------------------
# schedule
# ---------------------------------------------------------------------------


def test_schedule_paper_formulas():
    sched = dnc.schedule(16, 1, 4, 0.1, profile="paper")
    assert sched.eta == math.ceil(4 / (4 * math.log2(4 / 3)))  # = 3
    assert sched.eta == 3
    assert sched.Delta == 4
    assert sched.h == math.ceil(4.0**7)
    assert sched.K == sched.T == math.ceil(4.0**3)
    assert sched.slice_width == 10 and sched.max_gap == 10
    assert sched.w0 == 20 * 1 * (sched.Delta + sched.h + 2)
    assert sched.z_width == 10 * 1 * (sched.Delta + sched.h + 2)
    assert sched.eps == pytest.approx(0.1 * 2.0 ** (-10 * 4 * 2))


def test_schedule_w0_formula_hand_value():
    # d = 1, Delta = 2, h = 1: w0 = 20 (2 + 1 + 2) = 100
    sched = dnc.schedule(16, 1, 3, 0.1, profile="desk", Delta=2, h=1, w0=20 * (2 + 1 + 2))
    assert sched.w0 == 100


def test_schedule_desk_minima_enforced():
    with pytest.raises(dnc.ScheduleError):
        dnc.schedule(16, 1, 3, 0.1, profile="desk", slice_width=1)
    with pytest.raises(dnc.ScheduleError):
        dnc.schedule(16, 1, 3, 0.1, profile="desk", Delta=0)
    with pytest.raises(dnc.ScheduleError):
        dnc.schedule(16, 1, 3, 0.1, profile="desk", K=0)
    with pytest.raises(dnc.ScheduleError):
        dnc.schedule(1, 1, 3, 0.1)


def test_schedule_eps_never_exceeds_delta():
    for n in (4, 8, 16, 64):
        for delta in (0.5, 0.1, 1e-3):
            sched = dnc.schedule(n, 1, 3, delta, profile="desk")
            assert sched.eps <= sched.delta


# ---------------------------------------------------------------------------
# driver edge cases
# ---------------------------------------------------------------------------


def test_a_full_returns_half_for_large_delta():
    s, _ = make_synth({"kind": "brickwork", "dims": [6], "depth": 1, "seed": 3, "gates": "haar"})
    assert dnc.a_full(s, None, 0.7, 3) == 0.5
    assert dnc.a_full(s, None, 0.5, 3) == 0.5


def test_a_full_brute_force_for_tiny_delta():
    s, circ = make_synth({"kind": "brickwork", "dims": [6], "depth": 1, "seed": 3, "gates": "haar"})
    tiny = 0.5 / circ.n_qubits ** (math.log2(circ.n_qubits) ** 2)
    assert dnc.a_full(s, None, tiny, 3) == pytest.approx(
        oracle.synthesis_value_exact(s), abs=1e-14
    )


def test_a_full_d2_delegates_to_base_verbatim():
    s, _ = make_synth({"kind": "brickwork", "dims": [6], "depth": 1, "seed": 3, "gates": "haar"})
    calls = []

    def spy_base(synth, delta):
        calls.append((synth, delta))
        return 0.123456

    assert dnc.a_full(s, spy_base, 0.05, 2) == 0.123456
    assert calls == [(s, 0.05)]


def test_a_full_identity_small_lattice():
    s, _ = make_synth({"kind": "identity", "dims": [2, 2, 2], "depth": 1})
    assert dnc.a_full(s, None, 0.1, 3) == pytest.approx(1.0, abs=0.1)


def test_a_full_hadamard_cube():
    circ = gc.circuit((2, 2, 2), [[gc.gate("H", [q]) for q in np.ndindex(2, 2, 2)]])
    s = syn.synthesis_of_circuit(circ)
    est = dnc.a_full(s, None, 0.1, 3)
    assert abs(est - 2.0**-8) <= 0.1


# ---------------------------------------------------------------------------
# heavy slices
# ---------------------------------------------------------------------------


def desk_run(spec, delta, D=3, overrides=None, trace=None):
    s, circ = make_synth(spec)
    cfg = dnc.DncConfig(profile="desk", overrides=overrides or {}, cap=24)
    est = dnc.a_full(s, None, delta, D, config=cfg, trace=trace)
    return est, s, circ


def test_heavy_slices_identity_all_heavy():
    s, circ = make_synth({"kind": "identity", "dims": [16, 1, 1], "depth": 1})
    sched = dnc.schedule(16, 1, 3, 0.1, profile="desk")
    slices = gc.enumerate_slices(circ, 0, sched.slice_width, sched.max_gap)
    heavy, enough = dnc.heavy_slices(
        s, slices, sched, lambda wsyn, err: oracle.synthesis_value_exact(wsyn)
    )
    assert heavy == slices
    assert enough


def test_heavy_slices_x_layer_none_heavy():
    s, circ = make_synth({"kind": "x_layer", "dims": [16, 1, 1], "depth": 1})
    sched = dnc.schedule(16, 1, 3, 0.1, profile="desk")
    slices = gc.enumerate_slices(circ, 0, sched.slice_width, sched.max_gap)
    heavy, enough = dnc.heavy_slices(
        s, slices, sched, lambda wsyn, err: oracle.synthesis_value_exact(wsyn)
    )
    assert heavy == []
    assert not enough


def test_heavy_classification_matches_direct_thresholding():
    spec = {"kind": "brickwork", "dims": [14, 1, 1], "depth": 1, "seed": 5, "gates": "weak", "strength": 0.2}
    s, circ = make_synth(spec)
    sched = dnc.schedule(14, 1, 3, 0.1, profile="desk")
    slices = gc.enumerate_slices(circ, 0, sched.slice_width, sched.max_gap)
    heavy, _ = dnc.heavy_slices(
        s, slices, sched, lambda wsyn, err: oracle.synthesis_value_exact(wsyn)
    )
    lo, hi = sched.heavy_thresholds()
    midpoint = 0.5 * (lo + hi)
    direct = [sl for sl in slices if syn.slice_weight(s, sl) >= midpoint]
    assert heavy == direct


def test_slice_weight_synthesis_matches_full_system_weight():
    spec = {"kind": "brickwork", "dims": [12, 1, 1], "depth": 2, "seed": 8, "gates": "haar"}
    s, circ = make_synth(spec)
    sl = gc.Slice(0, 4, 8)
    wsyn = dnc.slice_weight_synthesis(s, sl)
    assert wsyn.N == ()
    assert wsyn.gamma.dims[0] <= sl.width + 2 * circ.depth
    assert oracle.synthesis_value_exact(wsyn) == pytest.approx(
        syn.slice_weight(s, sl), abs=1e-12
    )


# ---------------------------------------------------------------------------
# region Z and combination arithmetic
# ---------------------------------------------------------------------------


def test_select_region_Z_hand_geometry():
    # length 100, z width 50 centered at 50 -> [25, 75)
    s, _ = make_synth({"kind": "identity", "dims": [100], "depth": 1})
    sched = dnc.schedule(100, 1, 3, 0.1, profile="desk", Delta=2, z_width=50)
    heavy = [gc.Slice(0, lo, lo + 2) for lo in range(0, 99, 4)]
    region, chosen = dnc.select_region_Z(s, sched, heavy)
    assert (region.lo, region.hi) == (25, 75)
    assert [c.lo for c in chosen] == [28, 32]  # left-most heavy slices inside Z
    assert all(c.lo >= 25 and c.hi <= 75 for c in chosen)


def test_select_region_Z_errors_when_too_few():
    s, _ = make_synth({"kind": "identity", "dims": [40], "depth": 1})
    sched = dnc.schedule(40, 1, 3, 0.1, profile="desk", Delta=3, z_width=8)
    heavy = [gc.Slice(0, 0, 2), gc.Slice(0, 36, 38)]
    with pytest.raises(dnc.SpacingError, match="spacing"):
        dnc.select_region_Z(s, sched, heavy)


def test_combine_delta1():
    assert dnc.inclusion_exclusion_combine([3.0], {}, {}, [1.0], K=2, Delta=1) == 3.0


def test_combine_delta2_unit_inputs():
    out = dnc.inclusion_exclusion_combine(
        [1.0, 1.0], {(1, 2): 1.0}, {}, [1.0, 1.0], K=2, Delta=2
    )
    assert out == pytest.approx(1.0)


def test_combine_delta3_unit_inputs_and_sign():
    single = [1.0, 1.0, 1.0]
    double = {(1, 2): 1.0, (1, 3): 1.0, (2, 3): 1.0}
    multi = {(1, 3, (2,)): 1.0}
    out = dnc.inclusion_exclusion_combine(single, double, multi, [1.0] * 3, K=2, Delta=3)
    assert out == pytest.approx(3.0 - 3.0 + 1.0)
    # sigma = {2} carries sign (-1)^(|sigma|+1) = +1
    out2 = dnc.inclusion_exclusion_combine(single, double, {(1, 3, (2,)): 2.0}, [1.0] * 3, K=2, Delta=3)
    assert out2 == pytest.approx(2.0)


def test_combine_kappa_coefficients():
    kap = [0.5, 2.0]
    K = 1
    out = dnc.inclusion_exclusion_combine(
        [1.0, 1.0], {(1, 2): 1.0}, {}, kap, K=K, Delta=2
    )
    p = 4 * K + 1
    assert out == pytest.approx(0.5**-p + 2.0**-p - 1.0**-p)


def test_combine_missing_keys():
    with pytest.raises(KeyError, match="missing sub-value"):
        dnc.inclusion_exclusion_combine([1.0, 1.0], {}, {}, [1.0, 1.0], K=1, Delta=2)


@settings(max_examples=40, deadline=None)
@given(
    delta=st.integers(min_value=1, max_value=4),
    value=st.floats(min_value=0.0, max_value=1.0),
    kappa=st.floats(min_value=0.3, max_value=1.0),
)
def test_combine_telescopes_on_constant_inputs(delta, value, kappa):
    # if every sub-product equals v * kappa-powers, the signed sum returns v
    K = 2
    p = 4 * K + 1
    single = [value * kappa**p] * delta
    double = {(i, j): value * kappa ** (2 * p) for i in range(1, delta + 1) for j in range(i + 1, delta + 1)}
    multi = {
        (i, j, sig): value * kappa ** (2 * p)
        for i in range(1, delta + 1)
        for j in range(i + 2, delta + 1)
        for sig in dnc.nonempty_subsets(range(i + 1, j))
    }
    out = dnc.inclusion_exclusion_combine(single, double, multi, [kappa] * delta, K=K, Delta=delta)
    assert out == pytest.approx(value, abs=1e-9)


# ---------------------------------------------------------------------------
# dimension reduction
# ---------------------------------------------------------------------------


def test_dimension_reduce_value_invariant():
    s, _ = make_synth({"kind": "identity", "dims": [2, 2, 2], "depth": 1})
    reduced = dnc.dimension_reduce(s, 2)
    assert reduced.declared_dims == (2, 2)
    assert reduced.thickness == (2,)
    assert oracle.synthesis_value_exact(reduced) == pytest.approx(1.0, abs=1e-12)

    s2, _ = make_synth({"kind": "brickwork", "dims": [6, 2, 1], "depth": 1, "seed": 4, "gates": "haar"})
    before = oracle.synthesis_value_exact(s2)
    after = oracle.synthesis_value_exact(dnc.dimension_reduce(s2, 1))
    assert after == pytest.approx(before, abs=1e-12)


def test_dimension_reduce_thin_axis_noop_on_values():
    s, _ = make_synth({"kind": "brickwork", "dims": [8, 1, 1], "depth": 1, "seed": 2, "gates": "haar"})
    reduced = dnc.dimension_reduce(s, 2)
    assert len(reduced.declared_dims) == 2
    assert reduced.gamma is s.gamma
    assert oracle.synthesis_value_exact(reduced) == pytest.approx(
        oracle.synthesis_value_exact(s), abs=1e-15
    )


def test_dimension_reduce_guards():
    s, _ = make_synth({"kind": "identity", "dims": [4, 2], "depth": 1})
    with pytest.raises(ValueError):
        dnc.dimension_reduce(dnc.dimension_reduce(s, 1), 0)
    with pytest.raises(ValueError):
        dnc.dimension_reduce(s, 5)


# ---------------------------------------------------------------------------
# a_recursive structure
# ---------------------------------------------------------------------------


def test_a_recursive_stopping_branch_delegates():
    s, circ = make_synth({"kind": "brickwork", "dims": [8, 1, 1], "depth": 1, "seed": 2, "gates": "haar"})
    sched = dnc.schedule(8, 1, 3, 0.1, profile="desk", w0=50)
    heavy = [gc.Slice(0, 2, 4)]
    out = dnc.a_recursive(s, sched, heavy, 3, None)
    expect = dnc.a_full(dnc.dimension_reduce(s, 0), None, sched.eps, 2)
    assert out == pytest.approx(expect, abs=1e-14)


def test_a_recursive_delta1_reduces_to_single_product():
    spec = {"kind": "brickwork", "dims": [14, 1, 1], "depth": 1, "seed": 5, "gates": "weak", "strength": 0.15}
    s, circ = make_synth(spec)
    sched = dnc.schedule(14, 1, 3, 0.05, profile="desk", Delta=1, h=1)
    slices = gc.enumerate_slices(circ, 0, sched.slice_width, sched.max_gap)
    region, chosen = dnc.select_region_Z(s, sched, slices)
    sl = chosen[0]
    calc = syn.CutCalculus("exact-spectral", K=sched.K, T=sched.T)
    data = syn.cut_data(s, sl, calc)
    sp = syn.split_at_cuts(s, sl, None, calc, data_i=data)
    expect = (
        dnc.a_recursive(sp.left, sched, slices, 3, None, eta=sched.eta - 1)
        * dnc.a_recursive(sp.right, sched, slices, 3, None, eta=sched.eta - 1)
        / data.kappa ** (4 * sched.K + 1)
    )
    got = dnc.a_recursive(s, sched, slices, 3, None)
    assert got == pytest.approx(expect, rel=1e-12)


def test_spec_desk_example_14_qubit_chain():
    # seeded 1D chain, 14 qubits, d = 1, desk profile (Delta=2, K=T=2, h=1)
    spec = {"kind": "brickwork", "dims": [14, 1, 1], "depth": 1, "seed": 5, "gates": "weak", "strength": 0.15}
    delta = 0.1
    est, s, circ = desk_run(spec, delta, overrides={"Delta": 2, "h": 1, "w0": 11, "z_width": 8})
    target = oracle.synthesis_value_exact(s)
    assert abs(est - target) <= delta


def test_end_to_end_error_within_delta_weak_chain():
    spec = {"kind": "brickwork", "dims": [16, 1, 1], "depth": 1, "seed": 7, "gates": "weak", "strength": 0.15}
    for delta in (0.1, 0.05):
        est, s, _ = desk_run(spec, delta)
        assert abs(est - oracle.synthesis_value_exact(s)) <= delta


def test_end_to_end_scrambling_returns_zero_correctly():
    spec = {"kind": "brickwork", "dims": [16, 1, 1], "depth": 1, "seed": 2, "gates": "haar"}
    est, s, _ = desk_run(spec, 0.05)
    assert est == 0.0
    assert oracle.synthesis_value_exact(s) <= 0.05


def test_end_to_end_two_level_recursion():
    # 24-qubit chains force the recursion to cut annotated children again
    for seed in (31, 37, 41):
        spec = {"kind": "brickwork", "dims": [24, 1, 1], "depth": 1, "seed": seed,
                "gates": "weak", "strength": 0.12}
        trace = dnc.TraceNode("run")
        est, s, _ = desk_run(spec, 0.05, trace=trace)
        internal = [
            n for n in trace.walk() if n.kind == "a_recursive" and not n.meta.get("stopped")
        ]
        assert len(internal) >= 2  # a child was itself cut
        assert abs(est - oracle.synthesis_value_exact(s, cap=24)) <= 0.05


def test_end_to_end_power_encoding_calculus():
    spec = {"kind": "brickwork", "dims": [16, 1, 1], "depth": 1, "seed": 5, "gates": "weak", "strength": 0.15}
    s, circ = make_synth(spec)
    cfg = dnc.DncConfig(
        profile="desk", calc=syn.CutCalculus("power-encoding", K=2, T=2), cap=24
    )
    est = dnc.a_full(s, None, 0.05, 3, config=cfg)
    assert abs(est - oracle.synthesis_value_exact(s)) <= 0.05


# ---------------------------------------------------------------------------
# traces
# ---------------------------------------------------------------------------


def run_with_trace(spec, delta, overrides=None, D=3):
    trace = dnc.TraceNode("run")
    est, s, circ = desk_run(spec, delta, D=D, overrides=overrides, trace=trace)
    return est, s, circ, trace


def internal_recursive_nodes(trace):
    return [
        n for n in trace.walk() if n.kind == "a_recursive" and not n.meta.get("stopped")
    ]


def test_trace_branch_counts_delta2():
    _, _, _, trace = run_with_trace({"kind": "identity", "dims": [16, 1, 1], "depth": 1}, 0.1)
    nodes = internal_recursive_nodes(trace)
    assert nodes
    for node in nodes:
        Delta = 2
        assert node.count("left") == Delta
        assert node.count("right") == Delta
        assert node.count("kappa") == Delta
        assert node.count("middle") == Delta * (Delta - 1) // 2
        assert node.count("sigma_term") == 0


def test_trace_branch_counts_delta3_with_sigma():
    _, _, _, trace = run_with_trace(
        {"kind": "identity", "dims": [20, 1, 1], "depth": 1}, 0.1, overrides={"Delta": 3}
    )
    nodes = internal_recursive_nodes(trace)
    assert nodes
    for node in nodes:
        Delta = 3
        assert node.count("left") == Delta
        assert node.count("right") == Delta
        assert node.count("kappa") == Delta
        assert node.count("middle") == Delta * (Delta - 1) // 2
        sigma_expect = sum(
            2 ** (j - i - 1) - 1 for i in range(1, Delta + 1) for j in range(i + 2, Delta + 1)
        )
        assert node.count("sigma_term") == sigma_expect == 1


def test_trace_width_contraction():
    _, _, _, trace = run_with_trace({"kind": "identity", "dims": [24, 1, 1], "depth": 1}, 0.1)
    sched = dnc.schedule(24, 1, 3, 0.1, profile="desk")
    for node in trace.walk():
        if node.kind in ("left", "right"):
            assert node.meta["child_width"] <= 0.75 * node.meta["parent_width"] + sched.slice_width


def test_trace_terminates_with_floors_respected():
    _, _, _, trace = run_with_trace({"kind": "identity", "dims": [24, 1, 1], "depth": 1}, 0.1)
    sched = dnc.schedule(24, 1, 3, 0.1, profile="desk")
    for node in trace.walk():
        if node.kind == "a_recursive" and not node.meta.get("stopped"):
            assert node.meta["width"] >= sched.w0
            assert node.meta["eta"] >= 1


def test_trace_json_serializable(tmp_path):
    import json

    _, _, _, trace = run_with_trace({"kind": "identity", "dims": [16, 1, 1], "depth": 1}, 0.1)
    path = tmp_path / "trace.json"
    with open(path, "w") as f:
        json.dump(trace.to_dict(), f)
    assert path.stat().st_size > 0


def test_determinism_bit_identical_values_and_traces():
    spec = {"kind": "brickwork", "dims": [16, 1, 1], "depth": 1, "seed": 7, "gates": "weak", "strength": 0.15}
    est1, _, _, tr1 = run_with_trace(spec, 0.05)
    est2, _, _, tr2 = run_with_trace(spec, 0.05)
    assert est1 == est2
    assert tr1.to_dict() == tr2.to_dict()


def test_expected_node_counts_match_traces():
    configs = [
        ({"kind": "identity", "dims": [16, 1, 1], "depth": 1}, {"Delta": 2}),
        ({"kind": "identity", "dims": [20, 1, 1], "depth": 1}, {"Delta": 3}),
        ({"kind": "identity", "dims": [12, 1, 1], "depth": 1}, {"Delta": 1}),
        ({"kind": "identity", "dims": [24, 1, 1], "depth": 1}, {"Delta": 2}),
        ({"kind": "identity", "dims": [8, 2, 1], "depth": 1}, {"Delta": 1}),
    ]
    delta = 0.1
    for spec, ov in configs:
        _, _, circ, trace = run_with_trace(spec, delta, overrides=ov)
        sched = dnc.schedule(circ.n_qubits, circ.depth, 3, delta, "desk", **ov)
        pred = dnc.expected_node_counts(circ.dims, circ.depth, 3, sched, delta)
        got = trace.counts_by_kind()
        got.pop("run")
        assert pred == got, (spec, pred, got)


def test_oracle_substitution_residual_bounded():
    # combine with oracle-exact sub-values; residual vs target within the
    # measured-error budget (2e + 2g)^Delta + 3 Delta^2 B3
    spec = {"kind": "brickwork", "dims": [16, 1, 1], "depth": 1, "seed": 7, "gates": "weak", "strength": 0.15}
    s, circ = make_synth(spec)
    sched = dnc.schedule(16, 1, 3, 0.05, profile="desk")
    slices = gc.enumerate_slices(circ, 0, sched.slice_width, sched.max_gap)
    _, chosen = dnc.select_region_Z(s, sched, slices)
    calc = syn.CutCalculus("exact-spectral", K=sched.K, T=sched.T)
    data = [syn.cut_data(s, sl, calc) for sl in chosen]
    vL, vR = [], []
    for k, sl in enumerate(chosen):
        sp = syn.split_at_cuts(s, sl, None, calc, data_i=data[k])
        vL.append(oracle.synthesis_value_exact(sp.left))
        vR.append(oracle.synthesis_value_exact(sp.right))
    single = [vL[k] * vR[k] for k in range(len(chosen))]
    sp = syn.split_at_cuts(s, chosen[0], chosen[1], calc, data_i=data[0], data_j=data[1])
    double = {(1, 2): vL[0] * oracle.synthesis_value_exact(sp.middle) * vR[1]}
    combined = dnc.inclusion_exclusion_combine(
        single, double, {}, [d.kappa for d in data], K=sched.K, Delta=2
    )
    target = oracle.synthesis_value_exact(s)
    e = max(d.e_residual for d in data)
    g = max(d.g_residual for d in data)
    model = errmodel.ErrorModel(
        n=16, d=1, D=3, h=sched.h, Delta=2, K=sched.K, T=sched.T, eta=sched.eta,
        e_of_n=e, g_of_n=g,
    )
    _, _, b3 = errmodel.script_bounds(model, sched.eps)
    budget = (2 * e + 2 * g) ** 2 + 3 * 4 * b3
    resid = abs(combined - target)
    print(f"oracle-substitution residual {resid:.3e} budget {budget:.3e} (e={e:.3e}, g={g:.3e})")
    assert resid <= budget
    assert resid <= 0.05
