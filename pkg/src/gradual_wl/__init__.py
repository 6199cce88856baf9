"""Gradual Weisfeiler-Leman refinement with kernels and edit-distance bounds."""

__version__ = "0.1.0"

from .graph import Dataset, Graph, Union, disjoint_union, induced_member
from .hierarchy import ROOT, ColorHierarchy, check_hierarchy
from .refinement import (
    ClusteringParams,
    SequentialUpdate,
    inductive_assign,
    is_stable,
    kmeans_renep,
    make_update,
    partition_of,
    refine_to_depth,
    refine_to_fixpoint,
    sequential_wl_refine,
    wl_refine,
)
from .kernels import GramMatrix, gram, oa_kernel, subtree_features, subtree_kernel
from .ged import (
    Assignment,
    EditCostModel,
    SizeGuardError,
    edit_path,
    exact_ged,
    gwlt_distance,
    gwlt_distance_matrix,
    knn_classify,
    nested_knn_accuracy,
    tree_metric_assignment,
)
from .tudataset import DatasetError, ParseError, StructureError, load_tudataset, write_tudataset
from .datagen import BlockGenParams, generate_dataset, preset
