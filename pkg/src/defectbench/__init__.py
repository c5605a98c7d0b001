"""defectbench: high-precision entanglement Hamiltonians of critical Ising chains with defects."""

__version__ = "0.1.0"
