"""evoctrl - Optimal mutation-rate control for the (1+1) EA on OneMax."""

__version__ = "0.1.0"
