# Simulation Module
# Numerical core: circuit relations, spectra, driven-dissipative dynamics,
# scans and fits. Pure functions of their inputs, safe to call from workers.

__version__ = "1.0.0"

from . import circuit, dynamics, errors, fit, spectroscopy, spectrum

__all__ = ['circuit', 'dynamics', 'errors', 'fit', 'spectroscopy', 'spectrum', '__version__']
