"""CNF encodings of cardinality constraints, grid-covering test cases and a small solver."""

from .cnf import (
    BadBounds, CnfError, CountMismatch, EmptyClause, EncodingStats, Formula, ParseError,
    Tautology, UnallocatedVariable, read_dimacs, stats, write_dimacs,
)
from .encoders import EncoderConfig, all_configs, build_constraint, encode_cardinality
from .geometry import GridKind, TestCaseSpec, build_instance, enumerate_shapes, point_ordering
from .seqcounter import SeqVariant, canonical_aux, encode_pigeonhole_transition, encode_seqcounter
from .solve import SolveResult, Status, enumerate_models, run_external, solve
from .sortnet import SortVariant, build_network, encode_sortnet
from .totalizer import encode_totalizer_atmost, encode_totalizer_equality

__version__ = "0.1.0"
