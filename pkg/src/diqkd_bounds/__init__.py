"""Upper and lower bounds on device-independent QKD key rates.

Modules
-------
qip        dense quantum-information primitives (states, POVMs, channels, entropies)
chsh       CHSH attack state, closed-form bounds and their numerical checks
intrinsic  squashing-channel search for the intrinsic information
peres      one-way rates of the Vertesi-Brunner bound entangled state
protocol   correlation tables and Monte Carlo protocol runs
cli        command-line interface
"""

__version__ = "0.1.0"
