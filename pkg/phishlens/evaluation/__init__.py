from .metrics import compute_metrics, confusion, log_loss, roc_auc, rates
from .stats import (
    anova_oneway,
    bonferroni,
    chi_square_2x2,
    chi_square_omnibus,
    pairwise_chi_square,
    tukey_hsd,
)
from .reports import write_reports
from .forward import EvaluationSettings, run_evaluation
