"""Algorithm configuration framework: knowledge-encoding processes and recommenders."""
from .config_space import (TOO_LARGE, Condition, Configuration, ConfigurationSpace, ParameterSpec,
                           decode, encode, enumerate_space, grid, neighbors, sample_uniform, validate)
from .evaluation import (EvalArchive, EvalRecord, TargetSpec, TargetSpawnError, evaluate,
                         evaluate_batch, synthetic_target)
from .instances import FeatureScaler, Instance, InstanceSet, dist, load_instance_set, medoid
from .kep import (Budget, KepState, SamplingStrategy, bootstrap_from_online, meta_sampling_step,
                  run_kep, run_online, sample_t)
from .models import (AggregateModel, CompositeModel, MappingModel, PartitionModel, SurrogateModel,
                     aggregate, fit_mapping, fit_partition, fit_surrogate, load_model, save_model,
                     seed_partition_from_population)
from .recommend import CandidatePool, Recommendation, recommend
from .scenario import Scenario, load_scenario, scenario_from_dict
from .search import Objective, SearchResult, argmax_enumerated, evolutionary_search, local_search

__version__ = "0.1.0"
