"""Pool files: manifest, label CSVs and atomic writes."""

from .pool_store import (
    LoadedPool,
    ManifestVoter,
    PoolManifest,
    assignment_csv_text,
    atomic_write,
    label_csv_text,
    load_pool,
    read_dialogue_csv,
    read_label_csv,
    read_manifest,
    read_split_samples,
    trace_csv_text,
    write_dialogue_csv,
    write_label_csv,
    write_pool,
)

__all__ = [
    "LoadedPool",
    "ManifestVoter",
    "PoolManifest",
    "assignment_csv_text",
    "atomic_write",
    "label_csv_text",
    "load_pool",
    "read_dialogue_csv",
    "read_label_csv",
    "read_manifest",
    "read_split_samples",
    "trace_csv_text",
    "write_dialogue_csv",
    "write_label_csv",
    "write_pool",
]
