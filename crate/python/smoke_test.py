"""Smoke test for the Python bindings.

Build the extension and place it next to this script (or on PYTHONPATH):

    cargo build --release -p decsvm-py
    cp target/release/libdecsvm_py.so python/decsvm_py.so
    python3 python/smoke_test.py
"""

import math
import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

import decsvm_py as dp


def approx(a, b, tol=1e-6):
    assert abs(a - b) <= tol, f"{a} vs {b}"


def main():
    # smoothed-loss values against known constants
    loss = dp.SmoothedHingeLoss("gaussian", 0.5)
    # at the hinge kink the smoothed value is h * phi(0)
    approx(loss.value(1.0), 0.5 / math.sqrt(2 * math.pi))
    approx(loss.grad(1.0), -0.5)
    approx(loss.lipschitz_constant(), 1.0 / (math.sqrt(2 * math.pi) * 0.5))
    log_loss = dp.SmoothedHingeLoss("logistic", 0.3)
    approx(log_loss.value(1.0), 0.3 * math.log(2.0))

    # bandwidth rule and its floor
    approx(dp.bandwidth_default(2000, 100), (math.log(100) / 2000) ** 0.25)
    approx(dp.bandwidth_default(10**8, 10), 0.05)

    # soft threshold
    assert dp.soft_threshold([2.5, -0.4, 0.0], 1.0) == [1.5, 0.0, 0.0]

    # topology helpers
    topo = dp.Topology.from_edges(3, [(1, 2), (2, 3)])
    assert topo.num_nodes() == 3 and topo.num_edges() == 2
    assert topo.neighbors(1) == [0, 2]
    er = dp.Topology.erdos_renyi(6, 0.8, 42)
    assert er.num_nodes() == 6

    # a tiny separable problem: solve and check the fit classifies correctly
    rng = random.Random(0)
    xs, ys = [], []
    for _ in range(80):
        y = 1.0 if rng.random() < 0.5 else -1.0
        xs.append([1.0, y * 1.5 + rng.gauss(0, 0.4)])
        ys.append(y)
    beta = dp.solve_csvm(xs, ys, loss, 0.01)
    correct = sum(
        1 for row, y in zip(xs, ys) if (row[0] * beta[0] + row[1] * beta[1]) * y > 0
    )
    assert correct >= 76, f"only {correct}/80 correct"

    # two-node consensus on identical shards agrees across nodes
    est = dp.run_consensus(
        [xs, xs], [ys, ys], dp.Topology.from_edges(2, [(1, 2)]), loss, 0.01, 200
    )
    for a, b in zip(est[0], est[1]):
        approx(a, b, 1e-8)

    thr, support = dp.hard_threshold([0.0, 0.3, -0.05], 0.1)
    approx(thr[1], 0.2)
    assert support == [1]

    print("smoke test passed")


if __name__ == "__main__":
    main()
