# ### Binary data as packed bit-vectors
#
# A dataset is a set of rows over binary attributes.  Each attribute is kept
# as one bit-vector, so a conjunction like "rows with a and b" is a bitwise
# AND followed by a popcount.

import tempfile
from pathlib import Path

import numpy as np

from specious.dataset import Dataset, load_fimi, pair_counts, support

# The smallest FIMI file worth looking at: three transactions.
tmp = Path(tempfile.mkdtemp())
(tmp / "three.dat").write_text("1 2\n2 3\n1 2 3\n")
d = load_fimi(tmp / "three.dat")
print(d.describe())

i1, i2 = d.index("1"), d.index("2")
print("support({1})   =", support(d, (i1,)))
print("support({1,2}) =", support(d, (i1, i2)))
print("support({})    =", support(d, ()))

# ### From a dense matrix
#
# Any 0/1 array works too.  Supports come out of the packed words directly.

rng = np.random.default_rng(0)
m = rng.random((1000, 5)) < [0.1, 0.3, 0.5, 0.7, 0.9]
d = Dataset.from_matrix(m, list("abcde"))
print(d.supports, m.sum(axis=0))

# ### The eight-cell table of a rule pair
#
# Speciousness is judged from the joint counts of a mediator X, an antecedent
# Q and a consequent C.  pair_counts returns all of them at once.

pc = pair_counts(d, (0,), (1, 2), 4)
print(pc)
print("cells xqc, xq~c, ..., ~x~q~c:", pc.cells(), "sum", sum(pc.cells()))
