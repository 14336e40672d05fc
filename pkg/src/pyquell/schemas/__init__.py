from .config import (
    AxisParams, EpisodeConfig, RewardConfig, NetworkConfig,
    PpoConfig, MoveSpec, HarnessConfig, RunConfig, ShaperKind,
)
from .report import EpisodeMetrics, EvalSummary, EvalReport, BaselineRow, UpdateMetrics
