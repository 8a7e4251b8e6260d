"""Monte Carlo check of the expectation side of the Tanaka formula.

E int_0^t p_eps(B(s) - a) dR(s) should equal int_0^t p_{R(s)+eps}(a) R'(s) ds,
because the divergence integral has mean zero.  Then the degenerate example
h(u) = 1/log u, where u^(2h(u)) is the constant e^2.
"""

import math

from mfvolterra import hurst, tanaka
from mfvolterra.simulate import RandomSeed

h = hurst.sinusoidal(0.75, 0.15)
results = tanaka.tanaka_lattice(h, [0.0, 0.2], [1e-2], [0.5, 1.0], 4000, RandomSeed(11), n_grid=512)
for r in results:
    print(f"a={r.a:+.1f} t={r.t:.1f}: MC {r.mc_mean:.4f} +- {r.mc_se:.4f}, deterministic "
          f"{r.deterministic:.4f}  z={r.z:+.2f}")

case = tanaka.remark13_case(math.e ** 1.1, math.e ** 1.9)
print("u^(2h(u)) constant:", case["unnormalized_constant"],
      "| normalized variance range:", [round(v, 4) for v in case["normalized_range"]])
