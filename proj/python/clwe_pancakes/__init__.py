"""CLWE pancake-mixture hard instances for binary classification.

Gaussian pancake mixtures with a planted polynomial-threshold labeling: data
that is conjecturally indistinguishable from noise for efficient learners,
while a planted degree-4d classifier achieves near-zero error. Includes the
samplers, exact densities, the planted oracle, the monomial lift to halfspaces,
and the numerical verification suite.
"""

from ._core import (
    Oracle,
    build_oracle,
    clwe_density,
    criterion_names,
    discrete_gaussian_sample,
    discrete_gaussian_tail,
    embed_monomials,
    oracle_error_exact,
    pancake_density_1d,
    poisson_residual,
    read_dataset,
    read_manifest,
    rho,
    sample_mixture,
    sample_null,
    sigma_to_width,
    theta_mass,
    verify,
    width_to_sigma,
    write_dataset,
)
from ._core import __version__

__all__ = [
    "Oracle",
    "build_oracle",
    "clwe_density",
    "criterion_names",
    "discrete_gaussian_sample",
    "discrete_gaussian_tail",
    "embed_monomials",
    "oracle_error_exact",
    "pancake_density_1d",
    "poisson_residual",
    "read_dataset",
    "read_manifest",
    "rho",
    "sample_mixture",
    "sample_null",
    "sigma_to_width",
    "theta_mass",
    "verify",
    "width_to_sigma",
    "write_dataset",
    "__version__",
]
