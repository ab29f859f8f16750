from ._msgcn import (
    Error,
    Model,
    Network,
    ParseError,
    ValidationError,
    candidate_links,
    cli,
    fit,
    generate_dataset,
    generate_network,
    gradcheck,
    load_dataset,
    metrics,
    welch_ttest,
)

__all__ = [
    "Error",
    "Model",
    "Network",
    "ParseError",
    "ValidationError",
    "candidate_links",
    "cli",
    "fit",
    "generate_dataset",
    "generate_network",
    "gradcheck",
    "load_dataset",
    "metrics",
    "welch_ttest",
]
