"""Monodromy, spectral, and blow-up computations for the n = 1 Lame equation
and its generalized Lame-type variant on complex tori."""

__version__ = "0.1.0"

from .elliptic import (Torus, TorusPoint, invert_wp, premodular_Z, torus_init,
                       wp_family, zeta_sigma)
from .equivalence import (correspond, gle_data_at_p, lift, limit_family,
                          pv6_wp_pstar, singular_locus_check,
                          verify_trace_equivalence)
from .errors import LameSpectraError
from .metrics import (blowup_at_singularity_check, blowup_sets,
                      green_critical_residual, p_star, premodular_zero_tau)
from .monodromy import (CompletelyReducible, MonodromyResult,
                        NonCompletelyReducible, classify, integrate_monodromy,
                        loop_monodromy, monodromy_sweep)
from .potentials import (Branch, GLEParams, LameParams, LimitLameTypeParams,
                         frobenius_no_log, make_apparent, potential_eval)
from .spectral import (HermiteData, SpectralCurvePoint, bk_phi, bk_psi,
                       chi_ratio, hermite_zeros, lambda_data, phi_e,
                       phi_e_derivative, spectral_polynomial)
from .spectral_sets import (ArcSet, classify_regime, discriminant_grid,
                            endpoints, extract_arcs, fit_discriminant_order,
                            predicted_decomposition, real_axis_spectrum)

__all__ = [name for name in dir() if not name.startswith("_")]
