"""Description lengths and implicit models for community detection objectives.

Any quality function that depends on a partitioned graph only through
its block summary has an implicit generative model; this package
computes the resulting description lengths, the priors the model puts
on quality values and group counts, and the problem instances on which
the corresponding algorithm is optimal.
"""

from ._kernels import IMPLEMENTATION as KERNEL_IMPLEMENTATION
from .dos import (ArgmaxState, DosHistogram, PlantedGrid, argmax_state,
                  dos_histogram, log_omega, log_omega_dc,
                  log_partition_function, mean_quality)
from .errors import (BlockdlError, GraphParseError, InfeasibleError,
                     NumericError, UndefinedObjectiveError, ValidationError)
from .graph import (BlockSummary, DegreeStats, Graph, Partition,
                    block_summary, degree_stats, load_edge_list,
                    load_partition, loads_edge_list, loads_partition,
                    write_edge_list, write_partition)
from .instances import (FeasibilityCurve, InstanceSample, PriorCurve,
                        TransitionResult, conditional_b_given_w,
                        detectability_ein_fraction, feasibility_curve,
                        locate_transition, prior_curves, sample_instance,
                        sample_pp)
from .mdl import (DlReport, cm_description_length, description_length,
                  er_description_length, pp_description_length)
from .metrics import (ComparisonRecord, KlEstimate,
                      adjusted_mutual_information, compare_partitions,
                      fit_loglog_slope, infomap_variance_table, kl_estimate,
                      max_overlap, modularity_fluctuation_moments)
from .numeric import (PartitionCountTable, log_binomial,
                      log_double_factorial_even, log_factorial, log_multiset,
                      log_q_partitions, log_sum_exp)
from .optimize import (GammaScanResult, OptimizerConfig, OptResult,
                       effective_group_count, gamma_scan, maximize_quality,
                       posterior_sample)
from .quality import (Method, ein_from_infomap, ein_from_modularity,
                      infomap_score, modularity, planted_infomap,
                      planted_modularity, planted_quality, quality_of)

__version__ = "0.1.0"
