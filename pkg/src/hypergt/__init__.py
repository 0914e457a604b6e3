"""Group testing on hypergraphs: selectors, their construction, and identification protocols."""

from hypergt.construction import (
    BoundReport,
    BuilderConfig,
    CoverInstance,
    build_greedy,
    build_randomized,
    build_selector,
    cover_instance,
    eval_selector_bound,
    eval_two_stage_bound,
    selector_width,
)
from hypergt.hypergraph import (
    AugmentedHypergraph,
    Hypergraph,
    SSet,
    augment,
    compact,
    compute_chi,
    compute_p,
    parse_hypergraph,
    s_set,
    validate,
)
from hypergt.protocols import (
    ProtocolTranscript,
    TestOracle,
    decode_discard,
    respond,
    run_non_adaptive,
    run_three_stage,
    run_two_stage,
)
from hypergt.selectors import (
    SelectorVerdict,
    TestMatrix,
    count_identity_rows,
    is_p_selector,
    is_selector,
    is_separable,
    parse_matrix,
)

__version__ = "0.1.0"
