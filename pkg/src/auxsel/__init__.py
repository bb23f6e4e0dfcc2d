"""Graph-side machinery for latent recovery with observed sources:
d-separation, conditioning-set selection, linear SCM simulation,
volume-preserving mixings, identifiability rank checks, and MCC/DCI
scoring."""

from .dsep import (
    LatentPartition,
    ReachabilityResult,
    bayes_ball,
    d_separated,
    d_separated_oracle,
    partition,
)
from .graph import (
    COLLIDER,
    NON_COLLIDER,
    Dag,
    build_dag,
    classify_roles,
    graph_from_json,
    graph_to_json,
    random_dag,
    topological_order,
)
from .identifiability import (
    RankReport,
    ScoreMatrix,
    check_rank_direct,
    check_rank_subtracted,
    finite_difference_score_row,
    gaussian_score_row,
    score_matrix_for_scm,
)
from .metrics import (
    CorrelationMatrix,
    EvalReport,
    best_permutation,
    correlation_matrix,
    dci_scores,
    evaluate,
)
from .mixing import (
    MixingSpec,
    forward,
    inverse,
    mixing_from_json,
    mixing_to_json,
    numeric_jacobian_determinant,
    random_mixing,
)
from .pipeline import pipeline_run
from .scm import (
    GaussianConditional,
    NoiseSpec,
    SampleMatrix,
    ScmSpec,
    analytic_covariance,
    conditional,
    random_spec,
    sample,
    spec_from_json,
    spec_to_json,
)
from .selection import SelectionReport, enumerate_subsets, select

__version__ = "0.1.0"
