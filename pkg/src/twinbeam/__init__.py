"""Conditional quantum state engineering on entangled twin beams.

Builds realistic detector POVMs (on/off, homodyne, heterodyne), conditions
one beam of a two-mode squeezed vacuum on measurement outcomes of the other,
evaluates Wigner functions, and models continuous-variable teleportation as
a Gaussian-noise channel — with a closed-form oracle layer cross-validating
every numeric pathway.
"""

__version__ = "0.1.0"

from .conditional import (ConditionalResult, CoverageError, OutcomeProbabilityError,
                          average_conditional_energy, conditional_state,
                          conditional_with_feedback, outcome_probability)
from .fock import (FockOperator, Moments, TruncationConfig, TruncationError,
                   TwinBeamParams, assert_state, coherent_state, displaced_thermal,
                   displacement_operator, fidelity, moments, number_state,
                   squeeze_operator, squeezed_state, thermal_state, twb_entanglement,
                   twb_marginal, von_neumann_entropy)
from .oracles import (BinnedSqueezingReport, HomodyneStats, SqueezingReport,
                      binned_squeezing, binned_squeezing_scale, click_mixture_moments,
                      click_probability, conditional_photon_number, conditional_squeezing,
                      energy_average, homodyne_matrix_element, homodyne_stats, onoff_fano,
                      onoff_s_wigner_origin, onoff_wigner_origin)
from .phasespace import (PhaseGrid, operator_from_wigner, overlap_probability,
                         povm_wigner, s_wigner_origin_onoff, twb_wigner, wigner,
                         wigner_map, wigner_origin)
from .povm import (PovmElement, binned_homodyne_povm, heterodyne_povm,
                   heterodyne_reference, homodyne_povm, homodyne_projector,
                   onoff_povm, quadrature_wavefunction)
from .quadrature import ConvergenceError, gaussian_displacement_average
from .teleport import (BoundCheck, ChannelParams, EvolvedTwb, coherent_fidelity,
                       effective_K, evolve_twb_loss, nonlocality_bound,
                       teleport_coherent, teleport_state, teleport_via_conditioning)
