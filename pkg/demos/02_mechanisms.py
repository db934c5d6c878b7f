"""The four mechanisms, run on the same profiles, with exact outcomes.

Recursive halving hands out one interval per agent; the middle-sharing
variant splits each level's contested middle among everyone at that level;
the exchange wrapper reallocates reported-zero cake afterwards; the equal
splitter is the reference non-wasteful mechanism.
"""

import random

from cakecut import MECHANISMS, PiecewiseConstantValuation, Profile, check_properties
from cakecut.sampling import random_profile

picky = PiecewiseConstantValuation.of(["1/2", "4/5"], ["1", "0", "5/2"])
bottom_blind = PiecewiseConstantValuation.of(["1/2"], ["0", "2"])
profile = Profile.of([bottom_blind, picky])

print("profile: agent 0 ignores [0,1/2]; agent 1 ignores (1/2,4/5)\n")
for name, mechanism in sorted(MECHANISMS.items()):
    allocation = mechanism.run(profile)
    print(f"{name}:")
    for i, piece in enumerate(allocation.pieces):
        value = profile[i].value(piece)
        print(f"  agent {i} gets {piece}  (own value {value})")
    if not allocation.discarded.is_empty:
        print(f"  discarded: {allocation.discarded}")
    print()

print("exact property reports on 3 random 4-agent profiles:")
rng = random.Random(0)
for trial in range(3):
    sample = random_profile(rng, 4)
    for name in ("even-paz", "modified-ep", "equal-split"):
        report = check_properties(MECHANISMS[name], sample)
        print(f"  trial {trial} {name:12s} deficit={report.proportionality_deficit} "
              f"envy={report.envy} wasted={report.wasted_measure} "
              f"contiguous={report.contiguous}")
