"""Domain models and algorithms for evoctrl.

This package contains the functional core:
- Exact transition model of the (1+1) EA on OneMax
- Solvers for the mutation-rate control MDP
- Bit-level simulation, Q-Learning and Monte Carlo evaluation
- No file or console I/O
"""

from evoctrl.domain.models import ActionIndex, State, Steps, Theta

__all__ = ["ActionIndex", "State", "Steps", "Theta"]
