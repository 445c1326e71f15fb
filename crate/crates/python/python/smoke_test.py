"""Smoke test for the martincap extension module."""

import math

import martincap as mc


def check_chain():
    # walk on 0..3 absorbed off the right end with probability 1/2 per step
    c = mc.Chain(4, 0, [(0, 1, 0.5), (1, 2, 0.5), (2, 3, 0.5), (1, 0, 0.25)])
    p = c.hitting_probability([3])
    r = c.verify_sandwich([3])
    assert r["holds"], r
    assert abs(r["hitting_probability"] - p) < 1e-12
    assert r["lower"] - mc.SANDWICH_TOL <= p <= r["upper"] + mc.SANDWICH_TOL
    k = c.martin_kernel([2, 3])
    assert len(k) == 2 and abs(k[0][1] - k[1][0]) < 1e-12
    est = c.simulate_hitting([3], 20000, seed=1)
    assert est["lower"] - 0.02 <= p <= est["upper"] + 0.02, (est, p)
    for seed in range(20):
        rc = mc.Chain.random(seed)
        assert rc.verify_sandwich([rc.n_states - 1])["holds"]


def check_capacity():
    res = mc.martin_capacity([[2.0]])
    assert abs(res["capacity"] - 0.5) < 1e-12
    res = mc.martin_capacity([[1.0, 0.0], [0.0, 1.0]])
    assert abs(res["capacity"] - 2.0) < 1e-9
    assert abs(mc.energy([[1.0, 0.0], [0.0, 1.0]], [0.5, 0.5]) - 0.5) < 1e-12


def check_tree():
    t = mc.Tree()
    a = t.add_child(0, 0.5)
    t.add_child(a, 0.5)
    t.add_child(a, 0.5)
    assert abs(t.survival_probability() - 0.375) < 1e-12
    assert t.survival_probability_exact() == ("3", "8")
    r = t.verify_sandwich()
    assert r["holds"] and r["lower"] <= r["survival"] <= r["upper"], r
    mc_est = t.percolate(20000, seed=2)
    assert abs(mc_est["point_estimate"] - 0.375) < 0.02


def check_lattice():
    times = mc.block_times("linear", 3)
    assert times == [2, 3, 4, 5, 6, 8, 9, 10, 11]
    k1 = mc.return_kernel(times, dim=1)
    assert len(k1) == len(times)
    cantor = mc.cantor_set(3, [0, 2], 3)
    assert cantor[:4] == [0, 2, 6, 8]
    k = mc.riesz_kernel([[1, 0], [0, 1]], 0.5, norm="sup")
    assert abs(k[0][1] - k[1][0]) < 1e-15
    prof = mc.dimension_profile(cantor[1:], [0.3, 0.9], [1.0, 4.0])
    assert len(prof["decay"]) == 2
    rep = mc.intersection_experiment([1, 2, 3, 4], 2000, seed=3)
    assert rep["ratio"] is not None and 0.1 < rep["ratio"] < 10


def check_brownian():
    assert abs(mc.ball_hit_probability([2.0, 0.0, 0.0], 1.0, 3) - 0.5) < 1e-12
    res = mc.sphere_capacity(3, 400, 1.0)
    assert 0.9 < res["capacity"] < 1.1, res["capacity"]
    rows = mc.shell_profile(6, [2.0, 4.0], layers_per_octave=8, witness_nodes=200)
    caps = [r["layered_capacity"] for r in rows]
    assert caps[0] < caps[1] and all(math.isfinite(c) for c in caps)


def check_errors():
    for bad in (lambda: mc.Chain(2, 5, []), lambda: mc.block_times("cubic", 3)):
        try:
            bad()
        except ValueError:
            pass
        else:
            raise AssertionError("expected ValueError")


if __name__ == "__main__":
    for f in (check_chain, check_capacity, check_tree, check_lattice, check_brownian, check_errors):
        f()
        print(f"{f.__name__}: ok")
