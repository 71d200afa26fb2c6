"""Serialize a counter mid-stream and keep counting from the snapshot.

The binary snapshot carries the configuration, the counter state, and the
randomness state, so a restored counter continues bit-for-bit as if it
had never stopped.
"""

from veccount import CategoricalStream, VectorCounter, generate_stream, true_counts

stream = generate_stream(CategoricalStream(3, (0.5, 0.3, 0.2), 2000), seed=5)

counter = VectorCounter.create(2000, 3, 0.25, seed=9)
for j in stream[:1200]:
    counter.increment(int(j))

blob = counter.serialize()
print(f"snapshot after {counter.increments} increments: {len(blob)} bytes")

restored = VectorCounter.deserialize(blob)
for j in stream[1200:]:
    counter.increment(int(j))
    restored.increment(int(j))

print(f"original  {counter.query()}")
print(f"restored  {restored.query()}")
print(f"identical state: {restored.serialize() == counter.serialize()}")
print(f"true counts {true_counts(stream, 3).tolist()}")
