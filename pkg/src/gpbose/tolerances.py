"""Numerical tolerances used across the package.

Kept in one place so that run manifests can record exactly which values were
in force for a given result.
"""

TOLERANCES = {
    # scattering
    "scattering.asymptote_fit_fraction": 0.25,
    "scattering.slope_stability": 1e-8,
    "scattering.gaussian_truncation": 1e-14,
    "scattering.neumann_eig_residual": 1e-10,
    "scattering.default_ell0": 0.25,
    # ideal gas
    "ideal.zeta_terms": 10**6,
    "ideal.bose_tail": 1e-12,
    "ideal.density_residual": 1e-10,
    # gp solver
    "gp.normalization": 1e-12,
    "gp.residual_factor": 10.0,
    # bogoliubov
    "bogo.degeneracy_bin": 1e-9,
    "bogo.elambda_stability": 1e-3,
    # fock oracle
    "fock.dense_limit": 2000,
    "fock.budget": 20000,
    "fock.truncation_weight": 1e-8,
    "fock.identity": 1e-12,
}


def tol(name):
    return TOLERANCES[name]
