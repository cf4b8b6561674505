"""Precession-protocol toolkit: precessing observables, scores, bounds and probability spaces."""
from .observables import (Clock, FourLevel, PrecessingPair, PrecessionError, Raw, Spin, build_pair,
                          clock_fourier_state, make_clock, make_four_level, make_spin, optimal_state,
                          verify_precession)
from .protocol import (ScoreReport, SpectrumInfo, check_mean_sum_zero, classical_clock_max_p3,
                       dimension_witness, embed_grassmann, embed_real, general_bound, max_p3, p3_score,
                       spectrum)

__version__ = "0.1.0"
