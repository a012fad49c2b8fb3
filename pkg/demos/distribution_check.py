"""Compare scaled quadratic forms with their chi-square limit.

For stationary rows, (n - 1) 1 S 1' / (p sigma^2) is close to chi2_{n-1}
once p is large, where sigma^2 is the long-run variance.  The check is run
for independent coordinates and for a negatively correlated AR(1).
"""

from hdcovtest.montecarlo import chi2_limit_check
from hdcovtest.procsim import substream

for phi, law, p in ((0.0, "gaussian", 100), (-0.4, "gaussian", 5000), (-0.4, "centered_exponential", 5000)):
    for n in (3, 5, 10):
        chk = chi2_limit_check(n, p, phi, law, 2000, substream(11, n, p))
        verdict = "ok" if chk.passed else "too far"
        print(
            f"phi={phi:+.1f} {law:<21} n={n:<2} p={p:<5} sigma2={chk.long_run_variance:.4f} "
            f"KS={chk.ks_distance:.4f} (crit {chk.critical_value:.4f}) {verdict}"
        )
