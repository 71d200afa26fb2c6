"""A short tour of the three-symbol integer code.

Every value is written as the binary of (k-1) followed by a separator,
with 0 getting the bare separator.  The code is self-delimiting, so a
vector is just the concatenation of its entries' codes.
"""

import math

from veccount.varint import code_len, code_len_vec, decode_vec, encode_int, encode_vec

print("value -> code (length)")
for k in list(range(9)) + [15, 16, 100, 1000]:
    code = encode_int(k)
    print(f"{k:5d} -> {code:>12s}  ({code_len(k)})")

v = (3, 0, 4, 0, 1)
s = encode_vec(v)
print()
print(f"encode_vec({v}) = {s!r}")
print(f"decode_vec back  = {decode_vec(s, len(v))}")

# the properties the counter's budget argument leans on
print()
print("k, psi(k), 2 + log2(1+k), psi(ceil(k/2))")
for k in (3, 7, 12, 100, 10**6):
    print(f"{k:8d}  {code_len(k):3d}  {2 + math.log2(1 + k):6.2f}  {code_len((k + 1) // 2):3d}")

print()
print("halving a vector with a large entry always frees a symbol:")
for v in [(6, 5, 2, 2), (9, 0, 0), (3, 3, 1, 1)]:
    half = tuple((e + 1) // 2 for e in v)
    print(f"  psi{v} = {code_len_vec(v):2d}   psi{half} = {code_len_vec(half):2d}")
