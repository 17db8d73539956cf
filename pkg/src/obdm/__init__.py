"""Source-to-target rewriting for ontology-based data management.

Given a source schema, a DL-Lite TBox and a GLAV mapping, the library
decides whether an ontology query is a complete source-to-target
rewriting of a source query and computes the unique optimal complete
rewriting, with a brute-force model-enumeration oracle validating the
semantics at desk scale.  A small line-oriented DSL and a CLI front the
engine; see the README for the grammar and the command set.
"""

from .terms import (
    Atom,
    Instance,
    NullMinter,
    Term,
    atom,
    const,
    dom,
    freeze_instance,
    freeze_term,
    freeze_tuple,
    instance,
    is_ground,
    null_d,
    null_s,
    nulls,
    var,
)
from .queries import (
    ConjunctiveQuery,
    Disjunct,
    UnionQuery,
    bottom_query,
    cq,
    instance_of_query,
    query_of_instance,
    top_query,
    union_of,
)
from .evaluation import all_tup, evaluate_cq, evaluate_ucq, homomorphisms
from .chase import (
    AboxResult,
    ChaseOutcome,
    Egd,
    StTgd,
    abox_of,
    chase_egds,
    chase_tgds,
    egds_of_negated_ucq,
)
from .dllite import (
    Concept,
    DisjointConcepts,
    DisjointRoles,
    Exists,
    Functional,
    Identification,
    Role,
    SubConcept,
    SubRole,
    TBox,
    build_qsat,
    certain_answers_kb,
    kb_satisfiable,
    ni_closure,
    perfect_reformulation,
)
from .rewriting import (
    ObdmSpec,
    RewritingVerdict,
    Witness,
    check_complete,
    contained_wrt,
    equivalent_wrt,
    find_optimal_complete,
    proper_contained_wrt,
)
from .oracle import (
    Budget,
    brute_force_cq_answers,
    brute_force_ucq_answers,
    canonical_model,
    instances_isomorphic,
    kb_finite_model_satisfiable,
    mapping_satisfied,
    oracle_cert,
    oracle_cert_kb,
    oracle_check,
    oracle_models,
    pattern_embeds,
    refutation_decisive,
    tbox_satisfied,
)

__version__ = "0.1.0"
