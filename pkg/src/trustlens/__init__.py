"""Trust quantification for classifier prediction dumps.

Score each answer with question-answer trust, then aggregate into a trust
matrix, a per-class trust spectrum, NetTrustScore and its conditional
parts, and per-class conditional trust densities.
"""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    InvalidInputError,
    LabelSpace,
    PredictionRecord,
    ScoredRecord,
    ScoredTable,
    TrustParams,
    predicted_answer,
    question_answer_trust,
    score_record,
    score_records,
)
from .density import (  # noqa: E402
    ConditionalDensityPair,
    Density,
    DensityConfig,
    conditional_trust_densities,
    kde_curve,
    trust_density,
)
from .metrics import (  # noqa: E402
    TrustMatrix,
    TrustSpectrum,
    TrustSummary,
    conditional_summary,
    confusion_counts,
    net_trust_score,
    trust_matrix,
    trust_spectrum,
)

__all__ = [
    "InvalidInputError",
    "LabelSpace",
    "PredictionRecord",
    "ScoredRecord",
    "ScoredTable",
    "TrustParams",
    "predicted_answer",
    "question_answer_trust",
    "score_record",
    "score_records",
    "ConditionalDensityPair",
    "Density",
    "DensityConfig",
    "conditional_trust_densities",
    "kde_curve",
    "trust_density",
    "TrustMatrix",
    "TrustSpectrum",
    "TrustSummary",
    "conditional_summary",
    "confusion_counts",
    "net_trust_score",
    "trust_matrix",
    "trust_spectrum",
]
