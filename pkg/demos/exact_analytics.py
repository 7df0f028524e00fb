"""High-precision absorbing-chain analytics.

Solves the duration and size systems at several hundred decimal digits,
prints the duration-vs-initial-count curves behind the figure command,
and shows the reach (level-hitting) probabilities with their analytical
sandwich.
"""

import mpmath as mp

from avalanche import bounds as bc
from avalanche.exact import (PrecisionConfig, SubstochasticSystem,
                             expected_duration, max_distribution,
                             reach_probability)
from avalanche.harness import figure_curves
from avalanche.model import ModelParams


def main():
    params = ModelParams.from_intensity(100, 0.9)
    system = SubstochasticSystem(params, PrecisionConfig(100))
    et = expected_duration(system)
    print("E(T | X_0 = 1) at n = 100, c = 0.9, 100 digits:")
    print(" ", mp.nstr(et[0], 40), "...")

    print("\nduration curves (first and last point per intensity):")
    curves = figure_curves(100, (0.9, 1.0, 1.1, 1.3), 50, digits=100)
    for c, vals in curves.items():
        print(f"  c = {c}: E(T|1) = {vals[0]:.4f}, E(T|50) = {vals[-1]:.4f}")

    print("\nmax distribution at n = 40, c = 1.0, i0 = 1:")
    sys40 = SubstochasticSystem(ModelParams.from_intensity(40, 1.0),
                                PrecisionConfig(60))
    pmf = max_distribution(sys40, 1, j_max=8)
    for j in range(1, 9):
        print(f"  P(max = {j}) = {float(pmf[j]):.5f}")

    n, c, eps = 400, 1.5, 0.1
    params = ModelParams.from_intensity(n, c)
    system = SubstochasticSystem(params, PrecisionConfig(60))
    level = int(n * eps)
    h = reach_probability(system, level)
    print(f"\nreach probability to level {level} at n = {n}, c = {c}:")
    for i in (1, 2, 3):
        lo, hi = bc.reach_bounds_single(params, c, eps, i)
        print(f"  i = {i}: {lo:.4f} <= {float(h[i - 1]):.4f} <= {hi:.4f}")


if __name__ == "__main__":
    main()
