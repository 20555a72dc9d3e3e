"""Pulsed photon-phonon-photon transfer through an optomechanical cavity.

The package evaluates the effective Gaussian channel of an upload-store-
readout sequence at three fidelity levels (closed-form adiabatic model,
rotating-wave Langevin moments, full Langevin moments) and tests whether
Wigner negativity and quantum non-Gaussianity of a single photon survive.
"""
from .channel import (EffectiveChannel, PulseSchedule, SystemParams, adiabatic_channel,
                      added_noise_variance, entanglement_threshold, negativity_threshold,
                      storage_decay, swap_transmittance, total_transmittance)
from .errors import ConfigurationError, DomainError, SingularityError, TruncationError
from .fock import (FockState, GaussianChannelSpec, apply_channel_single_photon, fock_triple,
                   nongauss_boundary, nongauss_certified, p1G_of_p0, wigner_of_state)
from .langevin import (ExtractedChannel, TemporalMode, adiabatic_envelopes, matched_modes,
                       propagate_full, propagate_rwa)
from .presets import PRESETS, get_preset

__version__ = "0.1.0"
