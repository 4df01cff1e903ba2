"""
Walking one rating window through the pipeline
==============================================

A tiny marketplace: dana and erin hold stakes in each other, three
customers pay bob and carol and rate the service.  We run a single
window and print every intermediate stage.
"""

from liquidrank.config import EngineConfig
from liquidrank.engine import run_pipeline
from liquidrank.model import Kind, RatingRecord, ReputationState, TimeWindow

log = [
    # rater   ratee    kind              value  weight
    RatingRecord("dana", "erin", Kind.STAKE, 1.0, 40.0, timestamp=10),
    RatingRecord("erin", "dana", Kind.STAKE, 1.0, 25.0, timestamp=11),
    RatingRecord("ann", "bob", Kind.TRANSACTION, 0.8, 12.0, timestamp=20),
    RatingRecord("ann", "carol", Kind.TRANSACTION, -0.5, 3.0, timestamp=25),
    RatingRecord("pete", "carol", Kind.TRANSACTION, 0.9, 30.0, timestamp=30),
    RatingRecord("mia", "bob", Kind.TRANSACTION, 0.4, 5.0, timestamp=35),
]

# everyone starts from the neutral default, except dana who already has
# a track record; her ratings therefore weigh more
prev = ReputationState(at=0, values={"dana": 0.9})
window = TimeWindow(t_origin=0, t_prev=0, t_now=40)
cfg = EngineConfig(use_log_differential=True)

state, diff = run_pipeline(log, window, prev, cfg)


def show(title, values):
    print(title)
    if not values:
        print("  (empty)")
    for pid in sorted(values):
        print(f"  {pid:6s} {values[pid]: .4f}")
    print()


show("stake differential (who holds stake in whom)", diff.staked)
show("transaction differential (weighted customer ratings)", diff.transactional)
show("blended", diff.blended)
show("after log compression", diff.log_blended)
show("normalized to the window peak", diff.normalized)
show(f"reputation state at t={state.at}", state.values)

# carol collected one sour review and one glowing one; the big payment
# behind the glowing review decides the sign of her differential
print(f"carol's blended differential: {diff.blended['carol']:+.4f}")
