"""Multi-group zk-rollup simulator."""

from ._zkgroup import (
    RollupError,
    World,
    bench,
    chunk_count,
    compare_changegroup,
    empty_root,
    estimate_constraints,
    headline_metrics,
    op_names,
    public_input,
    pubdata_bytes,
    run_scenario,
)

__all__ = [
    "RollupError",
    "World",
    "bench",
    "chunk_count",
    "compare_changegroup",
    "empty_root",
    "estimate_constraints",
    "headline_metrics",
    "op_names",
    "public_input",
    "pubdata_bytes",
    "run_scenario",
]
