"""Exact p-adic Schwartz functions, local sections and Whittaker data."""
from .scalars import CyclotomicScalar, abs_p, frac_p, psi, reduce_mod, valuation
from .schwartz import (MalformedPolarization, PadicBox, Polarization, SchwartzFunction,
                       fourier_transform, pullback_monomial, weil_scaling)
from .local import (InducedSectionPhi0, WhittakerNewform, intertwining_value, iwasawa,
                    k1_index, k1_volume, phi_np, phi_np_hat, siegel_weil_section,
                    support_of_weil_translate, verify_sw_identity, whittaker_value,
                    zeta_factor)

__all__ = [
    "CyclotomicScalar", "abs_p", "frac_p", "psi", "reduce_mod", "valuation",
    "MalformedPolarization", "PadicBox", "Polarization", "SchwartzFunction",
    "fourier_transform", "pullback_monomial", "weil_scaling",
    "InducedSectionPhi0", "WhittakerNewform", "intertwining_value", "iwasawa",
    "k1_index", "k1_volume", "phi_np", "phi_np_hat", "siegel_weil_section",
    "support_of_weil_translate", "verify_sw_identity", "whittaker_value", "zeta_factor",
]
