"""Deterministic regularity diagnostics: Hölder exponent, Berman integral, LND ratios."""

from mfvolterra import analysis, hurst

h = hurst.sinusoidal(0.75, 0.15)

for t0 in (0.25, 0.5, 0.75):
    r = analysis.holder_exponent(t0, h)
    print(f"Hölder exponent at t0={t0}: {r.estimate:.4f} (h(t0) = {h(t0):.4f})")

const = hurst.constant(0.75)
print("Berman integral, H = 0.75:", analysis.berman_integral(const, 1.0),
      "closed form:", analysis.berman_constant_oracle(0.75))
v1, v2, rel = analysis.berman_refinement(h, 1.0, 128)
print(f"Berman integral, sinusoidal h: {v1:.6f} -> {v2:.6f} (change {rel:.2%})")

times = [0.2, 0.4, 0.6, 0.8]
print("conditional/unconditional increment variance:", analysis.lnd_ratio(times, h))
print("own-kernel lower bound:", analysis.lnd_whole_past_bound(times, h))
print("I(0.6, 0.9) =", analysis.lnd_I_lower_bound(0.6, 0.9))
