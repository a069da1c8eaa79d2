"""Exact computation with finite diversities.

A diversity assigns a nonnegative value to every finite subset of a ground
set, vanishing exactly on singletons and the empty set and satisfying a
triangle-like axiom.  This package represents finite diversities with
exact rational tables and provides axiom validation, diameter/Steiner
bounds, the one-point extension algebra (admissible functions, canonical
embeddings, maximal extensions, amalgamation), isomorphism and embedding
search, and seeded tower growth toward the extension property.
"""

from .core import (
    HARD_CAP,
    FiniteDiversity,
    MetricSpace,
    ValidationReport,
    Violation,
    induced_metric,
    lipschitz_check,
    restrict,
    table_report,
    validate,
)
from .bounds import (
    SteinerConfig,
    SteinerSolver,
    diameter_diversity,
    sandwich_check,
    steiner_diversity,
)
from .errors import (
    CapExceeded,
    DistortionTooLarge,
    DivlabError,
    DuplicateLabel,
    EmptySubset,
    EmptySupport,
    GenerationExhausted,
    InfeasibleInterval,
    InvalidPartialIso,
    MixedBase,
    NotAdmissible,
    ParseError,
    StructuralError,
)
from .extension import (
    AdmissibleFunction,
    Identified,
    admissible_quick,
    amalgamate,
    extend_from_support,
    has_support,
    hat_delta,
    hat_delta_pair,
    is_admissible,
    kappa,
)
from .homogeneity import (
    PartialIsomorphism,
    RealizationQuery,
    best_realizer,
    extension_deficit,
    extend_partial_isomorphism,
    find_embedding,
    find_isomorphism,
    perturb_to_admissible,
    realization_error,
    realize,
)
from .tower import (
    DEFAULT_CAP,
    BatterySpec,
    GrowthPolicy,
    GrowthRecord,
    TowerState,
    deficit_trace,
    grow,
    initial_state,
    random_admissible,
    random_diversity,
    random_katetov,
    random_support_function,
    replay,
    sample_battery,
)

__version__ = "0.1.0"
