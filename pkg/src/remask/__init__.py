"""remask: sufficiency-guided masked-diffusion generation and iterative
refinement for argument summarization, at desk scale."""

from .corpus import (
    ArgumentInstance,
    ClaimUnit,
    TokenSeq,
    Vocabulary,
    build_vocabulary,
    load_dataset,
    save_dataset,
    tokenize,
)
from .denoiser import (
    CategoricalDenoiser,
    DenoiserModel,
    OracleDenoiser,
    RemoteDenoiser,
    TrainConfig,
    TrainingReport,
    fill_masks,
    load_model,
    masked_nll,
    predict_distribution,
    save_model,
    train_denoiser,
    training_pairs,
)
from .engine import DiffusionSchedule, RefineConfig, RefinementTrace, generate, has_converged, refine
from .errors import RemaskError
from .masking import MaskConfig, MaskPlan, apply_plan, corrupt, sentence_mask_plan, sufficiency_mask_plan
from .metrics import (
    EvalReport,
    ablation,
    conciseness_proxy,
    coverage_proxy,
    evaluate_instances,
    faithfulness_proxy,
    rouge_l,
    rouge_n,
)
from .state import SummaryState, canvas
from .sufficiency import (
    ClassifierModel,
    CotClient,
    IdfTable,
    SufficiencyProfile,
    SufficiencyVerdict,
    broadcast_span_scores,
    classify_span,
    combine_scores,
    cot_judge,
    generate_perturbations,
    heuristic_scores,
    train_classifier,
)

__version__ = "0.1.0"
