"""Harmonic beam simulation and angle-of-arrival estimation for
column-coded switching surfaces.

A surface whose columns run cyclically shifted binary on/off codes reflects
an incoming tone into a comb of frequency-offset beams, one steering angle
per harmonic.  This package computes those beams, synthesizes what a
receiver hears through an impaired channel, and runs the estimation chain
(windowed spectrum averaging, harmonic-line detection, pattern matching)
that turns harmonic magnitudes back into an arrival angle, plus bearing
intersection for multi-surface position fixes.
"""

from .codes import (BinaryCode, CodeSchedule, HarmonicCoefficient,
                    harmonic_coefficient, harmonic_value, harmonic_values,
                    mapped_harmonic_value, phase_shift_per_bit,
                    sample_switching_waveform, shift_code)
from .patterns import (SPEED_OF_LIGHT, PatternLibrary, RisConfig,
                       array_response, build_pattern_library,
                       harmonic_pattern, max_harmonic_order, steering_angle)
from .channel import (ChannelConfig, MultipathTap, Waveform,
                      harmonic_line_amplitudes, state_matrix,
                      synthesize_received)
from .receiver import (AoaEstimate, AveragedSpectrum, HarmonicMeasurement,
                       angular_resolution, average_spectrum, detect_harmonics,
                       estimate_aoa)
from .scenarios import (SCENARIOS, PositionFix, ReceiverSettings, RisPose,
                        ScenarioWorld, intersect_bearings, local_angle,
                        run_scenario, world_bearing)
from . import errors

__version__ = "0.1.0"

__all__ = [
    "BinaryCode", "CodeSchedule", "HarmonicCoefficient",
    "harmonic_coefficient", "harmonic_value", "harmonic_values",
    "mapped_harmonic_value", "phase_shift_per_bit",
    "sample_switching_waveform", "shift_code",
    "SPEED_OF_LIGHT", "PatternLibrary", "RisConfig", "array_response",
    "build_pattern_library", "harmonic_pattern", "max_harmonic_order",
    "steering_angle",
    "ChannelConfig", "MultipathTap", "Waveform", "harmonic_line_amplitudes",
    "state_matrix", "synthesize_received",
    "AoaEstimate", "AveragedSpectrum", "HarmonicMeasurement",
    "angular_resolution", "average_spectrum", "detect_harmonics",
    "estimate_aoa",
    "SCENARIOS", "PositionFix", "ReceiverSettings", "RisPose",
    "ScenarioWorld", "intersect_bearings", "local_angle", "run_scenario",
    "world_bearing",
    "errors",
]
