"""Domain type definitions for evoctrl.

These NewTypes provide semantic clarity and help with type checking:
- State: number of one-bits of the current solution (0..n), the MDP state
- Theta: per-bit mutation probability, the MDP action value
- ActionIndex: position of a theta in the problem's action grid
- Steps: count of EA iterations (time-to-termination)
"""

from typing import NewType

# OM(x), the count of ones; n is the absorbing goal state
State = NewType("State", int)

# Mutation probability in (0, 1] for actions, [0, 1] for raw mutation
Theta = NewType("Theta", float)

# Index into ProblemSpec.actions
ActionIndex = NewType("ActionIndex", int)

# Number of EA iterations
Steps = NewType("Steps", int)
