"""crestwave: pseudo-spectral 2D gravity water waves in conformal variables."""

from .grid import GridFunction, Spectrum
from .dynamics import MarkerSet, StepSettings, WaveState, rhs, run, step_rk4
from .diagnostics import EnergyReport, MonitorPolicy, energy_report
from .initial import InitialData, make_family, make_flat, make_near_crest, make_smooth_wave, mollify

__version__ = "0.1.0"

__all__ = [
    "GridFunction", "Spectrum",
    "MarkerSet", "StepSettings", "WaveState", "rhs", "run", "step_rk4",
    "EnergyReport", "MonitorPolicy", "energy_report",
    "InitialData", "make_family", "make_flat", "make_near_crest",
    "make_smooth_wave", "mollify",
    "__version__",
]
