"""Recurrence times and periodic orbits of lattice maps via simulated quantum algorithms.

Subpackages: :mod:`qrecur.dynamics` (maps and matrices), :mod:`qrecur.oracles`
(exact classical references), :mod:`qrecur.qsim` (circuit simulator) and
:mod:`qrecur.algorithms` (period finding, Grover search, counting).
"""
__version__ = "0.1.0"
