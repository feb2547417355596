"""Behavioral simulator of a memristive STDP synapse, a winner-take-all
spiking network built from it, and a closed-form energy model of the chip."""

__version__ = "0.1.0"
