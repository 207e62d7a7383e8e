"""Experiment harness for the DQC1 filtering study."""
