"""Ontology-aware evaluation for multi-label audio tagging.

Computes classic mAP alongside OmAP, which reweights false positives by
their graph distance to the sample's labels over a class ontology, and the
matching OBCE loss weights for external training pipelines.
"""

__version__ = "0.1.0"

from .errors import InputOutputError, InternalError, ToolkitError, ValidationError
from .loading import EvaluationContext, load_context
from .metrics import (
    LevelResult,
    PRCurve,
    ReportComparison,
    ReweightMatrix,
    average_precision,
    compare_reports,
    comparison_csv,
    default_levels,
    level_curve_csv,
    mean_average_precision,
    oap,
    omap,
    pr_curve,
    reweight_matrix,
)
from .obce import (
    LossValue,
    WeightVector,
    bce_loss,
    combined_loss,
    obce_loss,
    obce_weights,
    obce_weights_batch,
)
from .ontology import (
    ClassIndex,
    DistanceMatrix,
    OntologyGraph,
    OntologyNode,
    all_pairs_distance,
    ontology_digest,
    parse_class_index,
    parse_edge_list,
    parse_ontology,
    threshold_distance,
)
from .tensorio import (
    EvaluationReport,
    LabelMatrix,
    PerClassResult,
    ReportMetadata,
    ScoreMatrix,
    WeightMatrix,
    read_matrix,
    read_report,
    write_matrix,
    write_report,
)

__all__ = [name for name in dir() if not name.startswith("_")]
