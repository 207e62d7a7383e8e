"""Two-qubit DQC1 simulation with post-selection and auxiliary purification."""

__version__ = "0.3.0"
