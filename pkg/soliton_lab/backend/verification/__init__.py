"""
Verification Module
===================

Two-pipeline checks of the soliton and level-set identities:
1. Residual reports (measure, status, extrapolation, convergence order)
2. Soliton identities (soliton equation, trace/Bianchi/Bochner/Hamilton, flow equation)
3. Evolution identities (H, |A|^2, h_ij)
4. Umbilical ratio identities (U_σ evolution, B and D rewrites, combined equation, U_0)
5. Suite runner
"""

from .residuals import (
    ResidualReport,
    Sides,
    build_report,
    convergence_order,
    extrapolated_sides,
    fd_report,
    residual_measure,
    richardson,
    skipped_report,
    term_scaled_residual,
)

from .soliton_identities import (
    LEMMA1_PARTS,
    verify_flow_equation,
    verify_lemma1,
    verify_principal_difference,
    verify_soliton_equation,
)

from .evolution_identities import (
    h_evolution_trace_gap,
    verify_A2_evolution,
    verify_H_evolution,
    verify_h_evolution,
)

from .umbilical_identities import (
    compare_gradient_readings,
    lemma_d_sides,
    verify_lemma_B,
    verify_lemma_B_reduction,
    verify_lemma_D,
    verify_main_theorem_U0,
    verify_prop3,
    verify_U_evolution,
)

from .suite import (
    IDENTITY_IDS,
    SIGMA_IDENTITIES,
    IdentitySuite,
    SuiteSummary,
    run_suite,
    summarize,
)

__all__ = [
    # Residuals
    'ResidualReport',
    'Sides',
    'build_report',
    'convergence_order',
    'extrapolated_sides',
    'fd_report',
    'residual_measure',
    'richardson',
    'skipped_report',
    'term_scaled_residual',

    # Soliton identities
    'LEMMA1_PARTS',
    'verify_flow_equation',
    'verify_lemma1',
    'verify_principal_difference',
    'verify_soliton_equation',

    # Evolution identities
    'h_evolution_trace_gap',
    'verify_A2_evolution',
    'verify_H_evolution',
    'verify_h_evolution',

    # Umbilical ratio
    'compare_gradient_readings',
    'lemma_d_sides',
    'verify_lemma_B',
    'verify_lemma_B_reduction',
    'verify_lemma_D',
    'verify_main_theorem_U0',
    'verify_prop3',
    'verify_U_evolution',

    # Suite
    'IDENTITY_IDS',
    'SIGMA_IDENTITIES',
    'IdentitySuite',
    'SuiteSummary',
    'run_suite',
    'summarize',
]
