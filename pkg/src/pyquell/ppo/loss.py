import torch
from dataclasses import dataclass, asdict

from ..errors import NonFiniteError
from ..neural import RecurrentActorCritic, RecurrentState, entropy, log_prob
from ..schemas.config import PpoConfig

@dataclass
class PpoBatch:
    obs: torch.Tensor               # [L, B, D]
    raw_actions: torch.Tensor       # [L, B, A]
    old_log_probs: torch.Tensor     # [L, B]
    advantages: torch.Tensor        # [L, B], normalized
    returns: torch.Tensor           # [L, B]
    starts: torch.Tensor            # [L, B], bool
    state: RecurrentState           # state before the first step, batch B

@dataclass
class PpoDiagnostics:
    policy_loss: float
    value_loss: float
    entropy: float
    entropy_loss: float
    total_loss: float
    clip_fraction: float
    approx_kl: float

    def as_dict(self) -> dict[str, float]:
        return asdict(self)

def clipped_surrogate(ratio: torch.Tensor, advantages: torch.Tensor, clip_eps: float) -> torch.Tensor:
    """Per-sample pessimistic objective min(rA, clip(r, 1-eps, 1+eps)A)."""
    return torch.min(ratio * advantages, ratio.clamp(1.0 - clip_eps, 1.0 + clip_eps) * advantages)

def ppo_loss(
    batch: PpoBatch,
    model: RecurrentActorCritic,
    config: PpoConfig,
    entropy_coef: float | None = None,
) -> tuple[torch.Tensor, PpoDiagnostics]:
    entropy_coef = config.entropy_coef if entropy_coef is None else entropy_coef

    out = model(batch.obs, batch.state, batch.starts)
    new_log_probs = log_prob(out.mean, out.log_std, batch.raw_actions)
    log_ratio = new_log_probs - batch.old_log_probs
    ratio = log_ratio.exp()

    policy_loss = -clipped_surrogate(ratio, batch.advantages, config.clip_eps).mean()
    value_loss = (out.value - batch.returns).pow(2).mean()
    policy_entropy = entropy(out.log_std)
    entropy_loss = -entropy_coef * policy_entropy
    loss = policy_loss + config.value_coef * value_loss + entropy_loss

    with torch.no_grad():
        diagnostics = PpoDiagnostics(
            policy_loss=policy_loss.item(),
            value_loss=value_loss.item(),
            entropy=policy_entropy.item(),
            entropy_loss=entropy_loss.item(),
            total_loss=loss.item(),
            clip_fraction=((ratio - 1.0).abs() > config.clip_eps).to(ratio.dtype).mean().item(),
            approx_kl=((ratio - 1.0) - log_ratio).mean().item(),
        )
    if not torch.isfinite(loss):
        raise NonFiniteError('PPO loss is not finite, update aborted', node='loss', diagnostics=diagnostics.as_dict())
    return loss, diagnostics
