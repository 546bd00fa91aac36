"""Hierarchical cluster-class matching over embedding sets.

The heavy lifting lives in the compiled `_core` extension; this package just
re-exports it. When running against a plain CMake build (no `pip install`),
point DENDROMATCH_EXT_DIR at the directory containing the built extension.
"""

try:
    from ._core import (
        build_hierarchy_json,
        build_mst,
        ccm_overall,
        conjunctive_divisions,
        core_distances,
        dbscan_flat,
        flat_cut,
        generate_synthetic,
        hccm_match,
        mutual_reachability,
        pair_score,
        pairwise_distance,
        render_layout_json,
        render_svg,
    )
except ImportError:  # pragma: no cover - dev-tree fallback
    import os
    import sys

    _ext_dir = os.environ.get("DENDROMATCH_EXT_DIR")
    if not _ext_dir:
        raise
    sys.path.insert(0, _ext_dir)
    from _core import (  # type: ignore  # noqa: F401
        build_hierarchy_json,
        build_mst,
        ccm_overall,
        conjunctive_divisions,
        core_distances,
        dbscan_flat,
        flat_cut,
        generate_synthetic,
        hccm_match,
        mutual_reachability,
        pair_score,
        pairwise_distance,
        render_layout_json,
        render_svg,
    )

__all__ = [
    "build_hierarchy_json",
    "build_mst",
    "ccm_overall",
    "conjunctive_divisions",
    "core_distances",
    "dbscan_flat",
    "flat_cut",
    "generate_synthetic",
    "hccm_match",
    "mutual_reachability",
    "pair_score",
    "pairwise_distance",
    "render_layout_json",
    "render_svg",
]
