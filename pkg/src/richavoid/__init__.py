"""Avoidability toolkit for additive/abelian powers and palindromic richness."""

from .words import (
    Alphabet,
    AffineProfile,
    BETA,
    DELTA,
    DomainError,
    FixedPointStream,
    GAMMA,
    Morphism,
    NotProlongableError,
    ParseError,
    Psi,
    SingularMatrixError,
    Word,
    eigenvalues_outside_unit_circle,
    format_word,
    is_palindrome,
    matmul2,
    parse_word,
    psi,
    reversal,
)
from .powers import (
    PowerKind,
    PowerOccurrence,
    PrefixTables,
    ScanReport,
    find_all_kpowers,
    find_kpower,
    is_kpower,
    relabel,
    scan_fixed_point,
    suffix_kpower,
)
from .eertree import (
    EerTree,
    RichnessReport,
    has_unioccurrent_palindromic_suffix,
    is_rich,
    stream_richness,
)
from .templates import (
    AncestorCapError,
    DecisionCertificate,
    DecisionConfig,
    Instance,
    PreconditionError,
    Template,
    TemplateSet,
    ancestor_closure,
    decide_additive_power_free,
    final_check,
    find_instance,
    initial_check,
    parents,
    root_template,
)
from .search import (
    BacktrackingSearch,
    CheckpointError,
    SearchResult,
    SearchSpec,
    longest_rich_power_free,
    verify_witness,
)

__version__ = "0.1.0"
