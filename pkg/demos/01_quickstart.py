"""A first look at the batched renaming array.

Processes register by grabbing a free cell and deregister by releasing it.
The array is split into batches of shrinking size; a get tries batch 0
first and only moves on when its trials there fail.
"""
from levelarray import LevelArray
from levelarray.rng import RngSpec

# capacity 16: at most 16 names are ever held at once
la = LevelArray(16)
lay = la.layout
print("batch sizes   ", lay.batch_sizes)      # (24, 4, 2, 1)
print("batch offsets ", lay.batch_offsets)
print("backup names  ", lay.backup_base_name, "..", lay.backup_base_name + lay.backup_size - 1)

rng = RngSpec("lehmer", 2024).stream()

# an empty array always answers on the first trial
name, stats = la.get(rng)
print("first get     ", name, stats)

# fill it up; later gets start to spill past batch 0
names = [name] + [la.get(rng)[0] for _ in range(15)]
print("held names    ", sorted(names))
print("per batch     ", la.batch_occupancy())    # backup count last

# collect reads every cell once and reports the held ones
assert la.collect() == set(names)

for nm in names:
    la.free(nm)
print("after frees   ", la.collect())

# with the debug checker on, releasing someone else's name is caught
dbg = LevelArray(16, debug=True)
mine, _ = dbg.get(rng, tag="alice")
try:
    dbg.free(mine, tag="bob")
except Exception as exc:
    print("misuse        ", type(exc).__name__, exc)
