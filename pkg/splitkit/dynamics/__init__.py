"""The collision process: single collisions, Poisson-timed paths, the
generator, Gaussian moment evolution and the closed-form law of V_t."""

from .collision import (
    CollisionScene,
    Trajectory,
    collide,
    exchanged_energy_fraction,
    mean_exchanged_fraction,
    simulate,
    propagate,
    states_at,
    poisson_jump_fractions,
    empirical_moments,
    export_trajectories_csv,
)
from .generator import ReversibilityResult, generator_apply, reversibility_check, dirichlet_form
from .moments import (
    MomentEvolution,
    moment_evolution,
    exact_moment_evolution,
    linear_semigroup,
    semigroup_variance,
)
from .entropy import (
    MixtureDensity,
    KLEstimate,
    choose_truncation,
    nu_t_density,
    kl_to_gaussian,
    dv_lower_bound,
    entropy_decay_bound,
)

__all__ = [
    "CollisionScene",
    "Trajectory",
    "collide",
    "exchanged_energy_fraction",
    "mean_exchanged_fraction",
    "simulate",
    "propagate",
    "states_at",
    "poisson_jump_fractions",
    "empirical_moments",
    "export_trajectories_csv",
    "ReversibilityResult",
    "generator_apply",
    "reversibility_check",
    "dirichlet_form",
    "MomentEvolution",
    "moment_evolution",
    "exact_moment_evolution",
    "linear_semigroup",
    "semigroup_variance",
    "MixtureDensity",
    "KLEstimate",
    "choose_truncation",
    "nu_t_density",
    "kl_to_gaussian",
    "dv_lower_bound",
    "entropy_decay_bound",
]
