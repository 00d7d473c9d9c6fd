"""streamforest: incremental cascade forests for drifting data streams.

Building blocks, bottom up:

- ``streams``: synthetic generators with controlled concept drift, plus
  CSV/ARFF loaders.
- ``hoeffding``: single incremental decision trees with naive-Bayes leaves.
- ``drift``: adaptive-window change detection over bounded values.
- ``arf``: bagged tree ensembles with per-member drift recovery.
- ``cascade``: stacked layers of four forests whose class votes feed the
  next layer as extra features.
- ``active``: label-budgeted query strategies for prequential training.
- ``harness``: test-then-train evaluation, experiment grids and rank tests.

The numeric kernel lives in ``_core`` and is compiled when possible; see
``streamforest.backend_name()``.
"""

from ._backend import backend_name as _backend_name
from .active import (AugmentedVariableUncertainty, BudgetState,
                     RandomizedVariableUncertainty, SelectiveSampling,
                     VariableUncertainty, label_fraction_simulation,
                     make_strategy, threshold_trajectory)
from .arf import AdaptiveRandomForest, ArfConfig, DriftReport
from .cascade import CascadeConfig, CascadeForest, layer_input
from .drift import AdwinDetector
from .errors import ConfigurationError, DataError, SchemaError, StreamForestError
from .harness import (FriedmanResult, PrequentialResult, average_ranks,
                      budget_sweep, depth_experiment, friedman_nemenyi,
                      read_accuracy_csv, run_prequential)
from .hoeffding import HNBTConfig, HoeffdingTree, hoeffding_bound
from .streams import (DriftSpec, DriftStream, Feature, Instance, Stream,
                      StreamSchema, create_generator, load_dataset,
                      make_stream, write_csv)

__version__ = "0.1.0"


def backend_name():
    """'compiled' when the C extension is active, else 'interpreted'."""
    return _backend_name


__all__ = [
    "AdaptiveRandomForest",
    "AdwinDetector",
    "ArfConfig",
    "AugmentedVariableUncertainty",
    "BudgetState",
    "CascadeConfig",
    "CascadeForest",
    "ConfigurationError",
    "DataError",
    "DriftReport",
    "DriftSpec",
    "DriftStream",
    "Feature",
    "FriedmanResult",
    "HNBTConfig",
    "HoeffdingTree",
    "Instance",
    "PrequentialResult",
    "RandomizedVariableUncertainty",
    "SchemaError",
    "SelectiveSampling",
    "Stream",
    "StreamForestError",
    "StreamSchema",
    "VariableUncertainty",
    "average_ranks",
    "backend_name",
    "budget_sweep",
    "create_generator",
    "depth_experiment",
    "friedman_nemenyi",
    "hoeffding_bound",
    "label_fraction_simulation",
    "layer_input",
    "load_dataset",
    "make_strategy",
    "make_stream",
    "read_accuracy_csv",
    "run_prequential",
    "threshold_trajectory",
    "write_csv",
    "__version__",
]
