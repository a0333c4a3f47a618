"""Observation and control reductions of matrix pencils ``(E, A)``."""

from .commutativity import CommutativityCertificate, build_JU, build_JW, commute_check, exact_sequence_sums
from .defects import (
    DefectProfile,
    alpha_defect,
    beta_ctrl_defect,
    beta_obs_defect,
    core_eigenvalues,
    defect_profile,
    invariants_equal,
    shift_law_check,
)
from .errors import ContainmentError, InputError, InvarianceError, PencilError, PreconditionFailed, ToleranceError
from .io import canonical_dumps, input_digest, load_pencil, load_report, save_pencil, save_report
from .pencil import (
    Block,
    EquivalencePair,
    Pencil,
    apply_equivalence,
    format_blocks,
    parse_blocks,
    random_equivalence,
    synthesize,
)
from .reduction import (
    PencilScale,
    ReductionChain,
    ReductionStep,
    control_index_one,
    control_reduce,
    irreducible_core,
    is_irreducible,
    normality_check,
    observation_reduce,
    reduce,
    reduce_chain,
    variational_index_one_check,
    yagi_bound,
)
from .report import AnalysisReport, analyze
from .saddle import (
    InfSupResult,
    SaddleSpec,
    build_saddle_pencil,
    example_mixed_poisson,
    example_multiplication_discrete,
    inf_sup_constant,
    saddle_reduction_ladder,
    solve_saddle,
)
from .spectrum import (
    OdeExtract,
    ResolventSample,
    core_spectrum,
    five_lemma_predicates,
    reduce_to_ode,
    resolvent_invariance_check,
    resolvent_member,
    sample_lambdas,
    solve_linear,
)
from .subspace import DEFAULT_TOL, Subspace, Tolerance

__version__ = "0.1.0"
