"""Local computation on families of compatible frames."""
from .frames import (
    Frame,
    FrameError,
    FrameRegistry,
    MultivariateModel,
    Universe,
    bottom,
    cond_independent,
    is_commutative_pair,
    join,
    make_frame,
    meet,
    mv_frame,
    refines,
    top,
    transport_set,
)
from .potentials import (
    ContradictionError,
    NotCommutativeError,
    ProbPotential,
    SetPotential,
    likelihood,
    lift,
    pp_combine,
    pp_normalize,
    pp_transport,
    sp_combine,
    sp_normalize,
    sp_transport,
    unit,
)
from .pas import Pas, pas_bpa, pas_combine
from .conditioning import conditional, condition_on_event, factorization_equivalences, inverse
from .markov import (
    MarkovError,
    MarkovTree,
    MessageStore,
    build_join_tree_multivariate,
    collect,
    hugin,
    lauritzen_spiegelhalter,
    shenoy_shafer,
    verify_markov,
)
from .maxprod import max_transport, mpe, solution_sets
from .oracle import global_combine, oracle_marginal, oracle_mpe
