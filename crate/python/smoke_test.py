"""Smoke test for the hmsos extension module.

Build and install first:  maturin develop -m crates/python/Cargo.toml
"""
import math

import hmsos

assert abs(hmsos.sigma_u(1.0) - 1.0) < 1e-10
assert abs(hmsos.sigma_u(1.5) - 0.6965745025576968) < 1e-12
assert hmsos.decay_factor(0, 100) == 2.0 and hmsos.decay_factor(100, 100) == 0.0
assert hmsos.adaptive_count(1, 50, 2, 10) == 10
assert hmsos.adaptive_count(50, 50, 2, 10) == 2
assert hmsos.rank_values([3.0, 1.0, 2.0]) == [3, 1, 2]

assert "hms-os" in hmsos.algorithms() and len(hmsos.benchmarks()) >= 8
d = hmsos.defaults("hms-os")
assert d["c1"] == 1.5 and d["k_objective"] == 10 and d["m_high"] == 10
assert hmsos.evaluate("sphere", [1.0, 2.0]) == 5.0

r = hmsos.run("hms-os", "rastrigin", 5, seed=3, nfe_max=2000)
assert r.nfe == r.records[-1][0] and r.best_value == r.records[-1][1]
assert r.final_error is not None and r.final_error >= 0.0
assert all(a[1] >= b[1] for a, b in zip(r.records, r.records[1:]))
again = hmsos.run("hms-os", "rastrigin", 5, seed=3, nfe_max=2000)
assert again.records == r.records

calls = []


def booth(x):
    calls.append(1)
    return (x[0] + 2 * x[1] - 7) ** 2 + (2 * x[0] + x[1] - 5) ** 2


m = hmsos.minimize(booth, [-10.0, -10.0], [10.0, 10.0], nfe_max=3000, seed=1)
assert len(calls) == m.nfe, (len(calls), m.nfe)
assert m.best_value < 1e-2 < m.records[0][1] and math.dist(m.best_position, [1.0, 3.0]) < 0.2, m

m = hmsos.minimize(booth, [-10.0, -10.0], [10.0, 10.0], algorithm="pso", params={"n_pop": 20}, nfe_max=500)
assert m.nfe <= 520


def broken(x):
    raise RuntimeError("boom")


try:
    hmsos.minimize(broken, [0.0, 0.0], [1.0, 1.0], nfe_max=100)
except RuntimeError as e:
    assert "boom" in str(e)
else:
    raise AssertionError("exception from the objective must propagate")

try:
    hmsos.run("hms", "sphere", 4, params={"m_low": 6})
except ValueError:
    pass
else:
    raise AssertionError("m_low > m_high must be rejected")

labels, centroids, inertia = hmsos.kmeans([[0.0, 0.0], [0.0, 1.0], [10.0, 10.0], [10.0, 11.0]], 2)
assert labels[0] == labels[1] != labels[2] == labels[3] and inertia == 1.0

w = hmsos.wilcoxon([1.0, 2.0, 3.0, 4.0, 5.0], [0.0] * 5)
assert w.p_value == 0.0625 and w.method == "exact", w

print("smoke test passed")
