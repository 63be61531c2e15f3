"""
Prescriptions and delayed sharing
=================================

A prescription is one lookup table per agent: local memory in, action out.
The planner never picks actions directly. It picks a joint prescription and
each agent applies its own table to what only it knows.
"""

from phsplan.correlation import CorrelationDevice
from phsplan.domains import build_intrusion_model
from phsplan.prescriptions import apply, decode_joint_prescription, format_prescription, prescription_space_size

model = build_intrusion_model()

# Memories are (last action, last alert) pairs, encoded as 2*u + y, so each
# agent has 4 memories and 2 actions: 2**4 tables per agent, 256 joint ones.
print("joint prescriptions:", prescription_space_size(model))

# Flat index 0b0011_0101: agent 0 blocks only after blocking last step,
# agent 1 blocks whenever its last alert fired.
gamma = decode_joint_prescription(0b0011_0101, model)
print(format_prescription(gamma, model))
for mems in [(0, 0), (2, 1), (3, 3)]:
    print("memories", mems, "-> actions", apply(gamma, mems))

# %%
# Walk a short episode by hand. Each step the agents share the memory they
# held *before* acting: actions and alerts reach the common record one step late.

rng = CorrelationDevice(2024, ["demo"])
x, mems = model.sample_initial(rng)
for t in range(1, 6):
    u = apply(gamma, mems)
    x, y, r = model.step(x, u, rng)
    z, new_mems = model.innovate(mems, u, y)
    print(
        f"t={t} u={u} alerts={y} shared={model.decode_innovation(z)} "
        f"memory {mems}->{new_mems} conditions={model.state_conditions(x)} cost={-r:g}"
    )
    mems = new_mems
