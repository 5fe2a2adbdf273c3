"""Determinantal point processes on bounded-degree graphs.

Transfer-current and dilated kernels, conditioning, exact and sequential
sampling, Shannon-entropy estimators and local (ball) statistics.
"""

from .errors import DetentError, FormatError, NumericalError, UsageError
from .graph import Edge, Graph, RootedBall, ball, build_graph, generate_family, line_graph, read_graph, write_graph
from .kernels import GroundSet, Kernel, dilate, restrict, spectral_summary, transfer_current, validate_kernel
from .kernel_io import read_kernel, write_kernel
from .conditioning import ConditionPair, check_permitted, condition_in, condition_out, condition_pair
from .sampling import enumerate_pmf, inclusion_probability, sample_dpp, sample_many, wilson_ust
from .entropy import (
    EntropyEstimate,
    LabelOrder,
    chain_entropy_exact,
    exact_entropy,
    hbar_graph_sum,
    hbar_percolation,
    lyons_formula,
    matrix_tree_logZ,
    mc_entropy,
)
from .bsstats import ball_distance, decorated_ball, empirical_stats, sequence_report, tightness_profile

__version__ = "0.1.0"
