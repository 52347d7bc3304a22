"""Coded-modulation and BICM capacities in the wideband (low-SNR) regime."""

from .capacity import (AWGN, CapacityValue, ChannelModel, MonteCarlo, Quadrature,
                       bicm_capacity, bicm_capacity_direct, cm_capacity, gaussian_reference)
from .constellation import (Constellation, Covariance2x2, LabeledConstellation, Moments,
                            covariance, from_json, make_pam, make_psk, make_qam, mixture,
                            moments, subconstellation, to_json)
from .errors import DivergedError, InvalidArgumentError, NoSolutionError
from .expansion import (ExpansionCoeffs, WidebandFigures, apply_fading, bicm_coeffs,
                        capacity_series, cm_coeffs, fit_coeffs_numeric, gray_c1,
                        linear_ebno_approx, wideband_figures)
from .tradeoff import (TradeoffPoint, TradeoffQuery, delta_p_approx, delta_p_exact_quadratic,
                       delta_w_approx, exact_tradeoff, nakagami_penalty)

__version__ = "0.1.0"
