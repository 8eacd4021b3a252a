"""Symmetry-driven hierarchical clustering of integer-lattice windows."""

from .core import (AffineMap, BudgetExceededError, FiniteSet, GeneratorSet,
                   GenMeta, SymabsError, TableMap, Window, apply, compose,
                   invert, is_minimal_generating_set, standard_generators)
from .engine import (AbstractionFamily, ExpansionPolicy, base_partition,
                     expand_and_restrict, induction_family,
                     orbit_partition_oracle, pruned_subset_count,
                     pruned_subset_masks, surjectivity_witness)
from .infolattice import (InfeasibleRulesError, Measure, Rule, entropy,
                          info_leq, info_metric, kl_divergence, learn_loop,
                          project, student_update, teacher_pick)
from .lattice import (AbstractionDag, bell_number, complete_hierarchy,
                      enumerate_all_partitions, hasse_reduce)
from .music import (ChainReport, ConceptLevel, canonical_label,
                    concept_chain_check, load_chords, music_generator_set)
from .partition import (Partition, Relation, act_on, join, meet, relate,
                        restrict)

__version__ = "0.1.0"
