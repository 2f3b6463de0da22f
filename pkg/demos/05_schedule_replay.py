"""Replaying a hand-written schedule step by step.

The adversary fixes who moves at every step ahead of time.  Each schedule
entry is one shared-memory step: one trial of a get, the reset of a free,
one cell read of a collect, or an idle call.
"""
from levelarray import LevelArray
from levelarray.simulator import (
    check_collect_validity,
    check_uniqueness,
    parse_config,
    run_schedule,
)

CONFIG = """
n = 4
B = 2
processes = 3
rng = marsaglia:7
steps = random:3
max_steps = 400
---
G . F G . . F
G C F
C . C
"""

cfg = parse_config(CONFIG)
la = LevelArray(cfg.schedule.n, cfg.probes, cells="flag")
trace = run_schedule(la, cfg.schedule, cfg.rng)

for e in trace.events:
    if e[0] == "get":
        print(f"step {e[3]:>3}: p{e[1]} got name {e[4]} after {e[5]} trial(s)")
    elif e[0] == "free":
        print(f"step {e[2]:>3}: p{e[1]} freed name {e[3]}")
    else:
        print(f"steps {e[2]}-{e[3]}: p{e[1]} collected {[nm for nm, _ in e[4]]}")

print("uniqueness:", check_uniqueness(trace) or "ok")
print("collect validity:", check_collect_validity(trace) or "ok")
print("holders at the end:", trace.final_holders)
