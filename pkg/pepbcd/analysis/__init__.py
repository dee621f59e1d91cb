from pepbcd.analysis.closed_form import (
    BlowupReport,
    am_bound,
    beck_ccd_bound,
    beck_descent_constant,
    blowup_example,
    racd_expected_bound,
    racd_init_bound,
    semi_analytic_bound,
)
from pepbcd.analysis.replay import InstanceOracle, QuadraticOracle, ReplayReport, numeric_replay
from pepbcd.analysis.studies import (
    BoundReport,
    LinearFit,
    StepSearchResult,
    descent_lemma_constant,
    linear_fit,
    lower_bound_ccd,
    optimal_step_search,
    racd_compare,
    reports_frame,
    worst_case,
    worst_case_random,
)
from pepbcd.analysis.theorems import (
    CheckResult,
    VerifySummary,
    run_verify_suite,
    verify_counterexample,
    verify_residual_bound,
    verify_sandwich,
    verify_scale_invariance,
    verify_two_block_descent,
)
