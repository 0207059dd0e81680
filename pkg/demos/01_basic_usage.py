"""
Ordered set/map basics
======================

A SplayList is an ordered set (optionally a map) over int64 keys.  It looks
like a skip list from the outside, but the height of each node adapts to how
often the node is accessed: hot keys float up, cold ones sink.
"""

from splaylist import SplayList

# start empty; contains/insert/delete have the usual set semantics
sl = SplayList()
print(sl.insert(10))        # True: new key
print(sl.insert(10))        # False: already present
print(sl.contains(10))      # True
print(sl.delete(10))        # True
print(sl.contains(10))      # False

# keys can carry a value payload
sl.insert(1, "one")
sl.insert(2, "two")
sl.insert(2, "TWO")         # overwrites the payload, returns False
print(sl.get(2))            # 'TWO'
print(sl.get(3, default="missing"))

# membership protocol and iteration over live keys in order
print(2 in sl, 3 in sl)
for key in range(3, 9):
    sl.insert(key)
print(list(sl.keys_live()))

# the structure keeps aggregate counters: m counts hits overall, M hits on
# currently-present keys; k = floor(log2 m) bounds the active height range
print(sl.stats)

# dump() serializes the full state (heights, hit counters, links) to text
# and load() restores it exactly
text = sl.dump()
clone = SplayList.load(text)
print(clone.dump() == text)
