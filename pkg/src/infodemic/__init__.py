"""Creator/consumer analysis of fake-news sharing on social media.

Ingest share logs, classify users as creators, consumers or non-spreaders,
measure network concentration and inter-group link density, follow group
dynamics over time and test causal coupling with convergent cross mapping.
"""

__version__ = "0.1.0"

from .ccm import (CCM, CcmConfig, CcmResult, convergence_profile, cross_map,  # noqa: E402
                  delay_embed, lagged_ccm, select_embedding_dim, surrogate_test)
from .classification import (ClassificationConfig, Role, RoleAssignment,  # noqa: E402
                             RoleClassifier, behavior_summary, classify_window,
                             sensitivity_sweep)
from .errors import InfodemicError, MissingArtifact  # noqa: E402
from .ingestion import (ContentCategory, EventLog, filter_events,  # noqa: E402
                        label_events, parse_events, write_events)
from .network import (build_network, concentration_curve,  # noqa: E402
                      group_link_density)
from .synthgen import (CoupledMapParams, PopulationParams,  # noqa: E402
                       gen_coupled_logistic, gen_lag_coupled, gen_population)
from .temporal import (daily_series, first_return_times,  # noqa: E402
                       moving_average, return_probability, transition_counts)

__all__ = [
    "CCM", "CcmConfig", "CcmResult", "ClassificationConfig", "ContentCategory",
    "CoupledMapParams", "EventLog", "InfodemicError", "MissingArtifact",
    "PopulationParams", "Role", "RoleAssignment", "RoleClassifier",
    "behavior_summary", "build_network", "classify_window", "concentration_curve",
    "convergence_profile", "cross_map", "daily_series", "delay_embed",
    "filter_events", "first_return_times", "gen_coupled_logistic", "gen_lag_coupled",
    "gen_population", "group_link_density", "label_events", "lagged_ccm",
    "moving_average", "parse_events", "return_probability", "select_embedding_dim",
    "sensitivity_sweep", "surrogate_test", "transition_counts", "write_events",
    "__version__",
]
