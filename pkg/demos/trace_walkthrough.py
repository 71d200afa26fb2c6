"""Watch a tiny counter absorb a stream, one state change at a time.

Same machinery as `veccount trace`, inlined so the intermediate objects
are visible.  The counter keeps d = 4 tallies inside a 12-symbol budget;
whenever the encoded mantissa would overflow it, the shared scale U grows
and every entry halves (odd ones on a fair coin).
"""

from veccount import CategoricalStream, CounterConfig, Trigger, VectorCounter, generate_stream
from veccount.varint import encode_vec

SEED = 31
STEPS = 60

config = CounterConfig(
    stream_limit=STEPS, dim=4, rel_error=0.0, accuracy=1,
    symbol_budget=12, scale_cap=64, trigger=Trigger.INCLUSIVE,
)
stream = generate_stream(
    CategoricalStream(4, (0.5, 0.25, 0.125, 0.125), STEPS), seed=SEED
)
counter = VectorCounter(config, seed=SEED + 1)
truth = [0, 0, 0, 0]

print(f"symbol budget {config.symbol_budget}, inclusive trigger")
print()
print(f"{'U':>2s}  {'V':>12s}  {'estimate':>16s}  {'x':>14s}  encoded")


def show():
    v = " ".join(str(e) for e in counter.mantissa)
    est = " ".join(str(e) for e in counter.query())
    x = " ".join(str(e) for e in truth)
    print(f"{counter.scale:2d}  {v:>12s}  {est:>16s}  {x:>14s}  {encode_vec(counter.mantissa)}")


show()
for j in stream:
    before = (counter.scale, counter.mantissa)
    counter.increment(int(j))
    truth[int(j) - 1] += 1
    if (counter.scale, counter.mantissa) != before:
        show()

print()
print(f"{counter.increments} increments, {counter.scale_ups} scale-ups")
print(f"final estimate {counter.query()} vs exact {truth}")
