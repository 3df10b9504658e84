"""Lightweight KAN thermal surrogate for battery core temperature.

Synthetic electro-thermal data generation, a from-scratch Kolmogorov-Arnold
network, MLP/RNN/LSTM baselines, optimizers and a benchmark harness.
"""

__version__ = "0.1.0"
