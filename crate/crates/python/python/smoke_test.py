"""Smoke test for the hybridnet_py extension.

Build and install with `maturin develop --release` from crates/python, or copy
target/release/libhybridnet_py.so to hybridnet_py.so next to this script.
"""

import math
import os
import sys
import tempfile

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import hybridnet_py as hn


def main():
    theta = hn.HybridParams(alpha=0.2, beta=0.6, p=0.8, delta_in=1.3, delta_out=0.7)
    assert abs(theta.gamma - 0.2) < 1e-12
    c1, c2 = theta.growth_exponents()
    assert 0 < c1 < 1 and 0 < c2 < 1

    try:
        hn.HybridParams(alpha=0.5, beta=0.6, p=0.5, delta_in=1.0, delta_out=1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("invalid parameters were accepted")

    net = hn.simulate(theta, 5000, 42)
    assert net.edge_count() == 5001
    assert sum(net.in_degrees()) == sum(net.out_degrees()) == net.edge_count()
    again = hn.simulate(theta, 5000, 42)
    assert again.edge_log().edges() == net.edge_log().edges()

    log = net.edge_log()
    assert log.classify() == log.scenarios()

    stats = log.replay()
    freqs = stats.mle_scenarios()
    fit = stats.fit_nelder_mead()
    assert abs(fit.point.alpha - freqs[0]) < 1e-6
    assert fit.log_likelihood >= stats.log_likelihood(theta) - 1e-9

    mh = stats.fit_mh(seed=1, burn_in=200, iterations=1000, thinning=10)
    assert 0.0 <= mh.acceptance_rate <= 1.0
    assert len(mh.trace()) == 100

    psi_in, psi_out = hn.limit_pmf(theta, 2000)
    assert abs(sum(psi_in) - (theta.alpha + theta.gamma)) < 1e-4
    assert abs(hn.nb_pmf(2.0, 0.5, 0) - 0.25) < 1e-15

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "edges.txt")
        with open(path, "w") as f:
            f.write("% source target time\n10 20 1\n30 10 2\n40 50 3\n")
        sub, mapping = hn.EdgeLog.parse(path).window(2, 2)
        assert sub.edges() == [(1, 2, 2)] and mapping == [(30, 1), (10, 2)]

    print("smoke test passed:", fit.point, "loglik", round(fit.log_likelihood, 3))
    assert math.isfinite(fit.log_likelihood)


if __name__ == "__main__":
    main()
