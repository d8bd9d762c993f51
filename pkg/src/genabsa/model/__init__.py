from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .config import ModelConfig, Vocab
from .gradcheck import gradient_check
from .network import EncoderOutput, PointerSeq2Seq, StepDistribution, nll_loss
from .search import beam_search, forced_prefix, generate, greedy, sequence_log_prob
from .training import OptimizerConfig, TrainingDiverged, TrainResult, train, triangular

__all__ = [
    "CheckpointError",
    "EncoderOutput",
    "ModelConfig",
    "OptimizerConfig",
    "PointerSeq2Seq",
    "StepDistribution",
    "TrainResult",
    "TrainingDiverged",
    "Vocab",
    "beam_search",
    "forced_prefix",
    "generate",
    "gradient_check",
    "greedy",
    "load_checkpoint",
    "nll_loss",
    "save_checkpoint",
    "sequence_log_prob",
    "train",
    "triangular",
]
