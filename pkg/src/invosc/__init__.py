"""Driven inverted harmonic oscillator: exact quantum evolution, quasistatic
barrier transmission, and the open-system (heat-bath) response machinery,
each cross-checked against independent numerical oracles."""

from .barrier_transmission import (TunnelingParams, asymptotic_prefactor,
                                   averaged_transmission,
                                   averaged_transmission_asymptotic,
                                   barrier_potential, prefactor_curve,
                                   transmission_exact, transmission_jwkb)
from .classical_dynamics import TrajectoryPoint, lagrangian_action, trajectory
from .closed_evolution import (EvolvedGaussian, PropagatorValue, action_S,
                               delta_kick_at, evaluate, evolve_delta_kick,
                               evolve_gaussian, propagator)
from .core import (ConstantForce, DeltaKick, ForceProfile, GaussianPacket,
                   HarmonicForce, SystemParams, TabulatedForce, ZeroForce,
                   evaluate_initial, force_at)
from .numerics import (GridState, QuadratureError, QuadratureResult,
                       bessel_k_quarter, free_grid_evolve, grid_from_packet,
                       integrate_adaptive, integrate_halfline,
                       langevin_ode_oracle, schrodinger_grid_evolve,
                       solve_cubic)
from .open_system import (CLASSICAL, OCCUPATION, SYMMETRIZED, BathParams,
                          CubicCoefficients, DegeneratePolesError,
                          InitialMoments, PoleDecomposition, RootClass,
                          bath_spectral_density, characteristic_coefficients,
                          closed_system_green, closed_system_green_derivative,
                          discriminant_boundary, displacement_variance,
                          drude_kernel, general_variance, green_derivative,
                          green_function, harmonic_response, mean_trajectory,
                          noise_spectrum, solve_poles, symmetrized_correlation,
                          variance_noise_term, windowed_transform)

__version__ = "0.1.0"
