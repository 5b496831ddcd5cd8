"""kgextend: align, recognize, and extend knowledge graphs.

The package splits along the pipeline stages: parsing and label
normalization (:mod:`kgextend.ingest`, :mod:`kgextend.text`), the graph
model (:mod:`kgextend.model`), the three-valued formal context
(:mod:`kgextend.fca`), string and taxonomy similarity
(:mod:`kgextend.lexsim`), property-overlap similarity
(:mod:`kgextend.propsim`), pair generation and property matching
(:mod:`kgextend.matcher`), the trainable pair classifiers
(:mod:`kgextend.recognizer`), quality metrics (:mod:`kgextend.assess`),
graph merging (:mod:`kgextend.extend`), and the command line
(:mod:`kgextend.cli`).
"""

from .assess import build_report
from .errors import KgError
from .extend import ExtensionPlan, ExtensionReport, extend
from .fca import FormalContext, formalize
from .ingest import load_graph_json, save_graph_json
from .model import KnowledgeGraph, build_graph

__version__ = "0.1.0"

__all__ = [
    "ExtensionPlan",
    "ExtensionReport",
    "FormalContext",
    "KgError",
    "KnowledgeGraph",
    "build_graph",
    "build_report",
    "extend",
    "formalize",
    "load_graph_json",
    "save_graph_json",
    "__version__",
]
