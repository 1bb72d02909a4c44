"""
Coalitions, lexicographic lists and integer partitions
=======================================================

Coalitions are bitmasks (agent i is bit i-1).  Each size has a lexicographic
list, and a coalition's complement sits at the mirrored row of the
complementary-size list.
"""

from csgip import (
    bell_number,
    complement_index,
    enumerate_partitions,
    index_to_coalition,
    members,
    subspace_size,
)

n = 6

# the size-3 list for six agents, with the row each entry pairs with
for x in range(1, 5):
    c = index_to_coalition(x, 3, n)
    y = complement_index(x, 3, n)
    print(x, members(c), "<->", y, members(index_to_coalition(y, 3, n)))

# the search space split by integer partition: sizes add up to Bell(n)
for G in enumerate_partitions(n):
    print(G, subspace_size(G))
print("total", sum(subspace_size(G) for G in enumerate_partitions(n)), "Bell", bell_number(n))
