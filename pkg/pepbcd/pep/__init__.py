from pepbcd.pep.assemble import EPIGRAPH, assemble_pep, assemble_random_pep
from pepbcd.pep.certificates import CertificateReport, WorstCaseInstance, dual_certificate, extract_worst_case
from pepbcd.pep.problem import Constraint, Criterion, CriterionKind, SdpProblem, Sense, Setting, SettingKind
from pepbcd.pep.sdpa import SdpaData, export_sdpa, read_sdpa, solve_sdpa
from pepbcd.pep.solver import SolverOptions, SolverResult, SolverStatus, solve

__all__ = [
    "EPIGRAPH", "CertificateReport", "Constraint", "Criterion", "CriterionKind", "SdpProblem", "SdpaData",
    "Sense", "Setting", "SettingKind", "SolverOptions", "SolverResult", "SolverStatus", "WorstCaseInstance",
    "assemble_pep", "assemble_random_pep", "dual_certificate", "export_sdpa", "extract_worst_case",
    "read_sdpa", "solve", "solve_sdpa",
]
