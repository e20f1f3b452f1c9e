"""Class-mapping optimization and poisoning toolkit for all-to-X backdoors.

Thin wrapper over the native ``_core`` module. Arrays go in and out as numpy
arrays; mappings are ``Mapping`` objects that serialize to the same JSON the
command line reads and writes.
"""

from ._core import (
    A2XError,
    Mapping,
    apply_trigger,
    brute_force_assign,
    cyclic_mapping,
    distance_matrix,
    hungarian_max,
    kmeans,
    load_dataset,
    load_embeddings,
    load_mapping,
    pearson,
    plan_mapping,
    poison,
    position_vectors,
    random_mapping,
    run_cli,
    save_dataset,
    save_embeddings,
    save_mapping,
    score_mapping,
    silhouette,
    synthesize,
    trigger_preset,
    validate_mapping,
)

__all__ = [
    "A2XError",
    "Mapping",
    "apply_trigger",
    "brute_force_assign",
    "cyclic_mapping",
    "distance_matrix",
    "hungarian_max",
    "kmeans",
    "load_dataset",
    "load_embeddings",
    "load_mapping",
    "pearson",
    "plan_mapping",
    "poison",
    "position_vectors",
    "random_mapping",
    "run_cli",
    "save_dataset",
    "save_embeddings",
    "save_mapping",
    "score_mapping",
    "silhouette",
    "synthesize",
    "trigger_preset",
    "validate_mapping",
]

__version__ = "0.1.0"
