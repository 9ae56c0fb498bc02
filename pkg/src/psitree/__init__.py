"""State preparation through nested-entanglement (psi) trees."""

__version__ = "0.1.0"

from .circuit import (
    Circuit,
    Gate,
    GateCounts,
    apply_circuit,
    census,
    circuit_unitary,
    count_gates,
    expand_up_controls,
    export_qasm,
)
from .compress import (
    LocalBasisTransform,
    MultilinearSystem,
    PruneAnalysis,
    build_multilinear_system,
    prune,
    prune_pair,
    pruned_state,
    rearrange_branches,
    schmidt_2q,
    solve_generalized_schmidt,
    subtree_overlap,
)
from .errors import *  # noqa: F401,F403
from .qft import QftNodeParams, dft_matrix, qft_branch_check, qft_circuit, qft_node, qft_params
from .state import (
    EPS_ZERO,
    FidelityReport,
    TargetState,
    fidelity,
    normalize,
    product_state,
    random_state,
)
from .synth import (
    SeparabilityVerdict,
    is_separable,
    level_blocks,
    level_operator,
    synth_pyramidal,
    synth_subtree,
)
from .tree import (
    PsiTree,
    build_tree,
    canonicalize,
    dump_bloch,
    fill_dead,
    subtree,
    tree_to_state,
)
