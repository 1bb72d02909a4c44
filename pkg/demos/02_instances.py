"""
Random instances and the instance file format
==============================================
"""

import tempfile
from pathlib import Path

from csgip import coalition, generate, load, save, size_stats

# three value distributions; same seed, same table on every machine
for kind in ("uniform", "normal", "ndcs"):
    t = generate(8, kind, seed=7)
    print(kind, "v({1,2}) =", round(t.value(coalition(1, 2)), 4))

t = generate(10, "ndcs", seed=1)
for st in size_stats(t)[:3]:
    print(st)

# binary round trip
path = Path(tempfile.mkdtemp()) / "inst.csgv"
save(t, path)
print(path.stat().st_size, "bytes, equal after reload:", load(path) == t)
