"""
Checking the theorem end to end
===============================

verify_forward runs every stage for one angle and combines the results
into pass / fail / inconclusive.  Periodic angles fail at the first stage.
The converse run starts from the landing parameter and asks which angles
land at the critical value, with random rationals as controls.
"""

from nonrecurrent import harness
from nonrecurrent.harness import Config

cfg = Config()
for spec in ("rule:triangular", "rat:1/3", "rat:1/2"):
    rep = harness.verify_forward(spec, cfg)
    print(f"{spec:16s} {rep.verdict:5s}", "; ".join(rep.reasons))

fwd = harness.verify_forward("rule:triangular", cfg)
conv = harness.converse_from_forward(fwd, cfg)
for cand in conv.candidates:
    print(f"  {cand['role']:9s} {cand['angle']:16s} characteristic={cand['characteristic']}")
print("converse:", conv.verdict)

# JSON, same as the command line
print(fwd.dumps()[:400], "...")
