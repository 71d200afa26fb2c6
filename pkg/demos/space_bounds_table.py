"""Space accounting: one shared scale vs d independent counters vs the floor.

For each configuration this prints the information-theoretic lower bound,
the bits the shared-scale counter actually uses, and what d separate
Morris counters would cost.  Once the dimension and stream length grow,
sharing the scale is strictly cheaper than paying per coordinate.
"""

from veccount import (
    CounterConfig,
    d_morris_space_bits,
    space_bits,
    state_space_lower_bound,
)

print(f"{'n':>8s} {'d':>4s} {'sigma':>6s} {'lower':>8s} {'shared':>7s} {'d-Morris':>9s}")
for exp in (10, 20, 40, 60):
    n = 2**exp
    for d in (1, 4, 16, 64):
        for sigma in (0.1, 0.3):
            config = CounterConfig.derive(n, d, sigma)
            _, lower = state_space_lower_bound(n, d, sigma)
            shared = space_bits(config).total
            separate = d_morris_space_bits(n, d, config.accuracy)
            marker = "  <- shared wins" if shared < separate else ""
            print(
                f"{'2^' + str(exp):>8s} {d:4d} {sigma:6.2f} "
                f"{lower:8.1f} {shared:7d} {separate:9d}{marker}"
            )

print()
print("u_bits grow like log2 log2 n; the mantissa budget does not move:")
for exp in (32, 64, 256, 1024):
    budget = space_bits(CounterConfig.derive(2**exp, 1, 0.1))
    print(f"  n=2^{exp:<5d} scale bits {budget.u_bits:3d}   mantissa bits {budget.v_bits}")
