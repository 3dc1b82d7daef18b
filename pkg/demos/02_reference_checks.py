"""Independent reference computations behind the library's numbers.

Each check recomputes a quantity along a second route: vector against
covariance algebra, sampling the signal model, brute-force search over
filters, finite differences, and so on.  The numbers printed are the
worst discrepancies found.

Run:  python3 demos/02_reference_checks.py      (about half a minute)
"""
import json

from coopisac import oracles

checks = [
    ("SINR, vector vs trace form", lambda: oracles.comm_formula_gap(states=50)),
    ("sensing SINR, sampled vs closed form", lambda: oracles.sensing_monte_carlo(states=10)),
    ("eigensolvers and inverse square root", lambda: oracles.linalg_suite(matrices=100)),
    ("conic solver on hand-solved programs", oracles.conic_canonical),
    ("rank-one recovery of relaxed beams", lambda: oracles.sdr_recovery(instances=5)),
    ("rate surrogate is a lower bound", oracles.surrogate_bound),
    ("max-SINR filter vs random filters", lambda: oracles.filter_random_search(cells=10)),
    ("trajectory gradients vs differences", lambda: oracles.rate_gradient_fd(states=10)),
]
for title, fn in checks:
    print(f"{title}:")
    print("  " + json.dumps(fn()))
