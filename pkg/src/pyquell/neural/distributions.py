import math
import torch
from dataclasses import dataclass
from torch.distributions import Normal

HALF_LOG_2PI_E = 0.5 * math.log(2.0 * math.pi * math.e)

@dataclass
class SampledAction:
    action: torch.Tensor        # clamped to the action bounds, [B, A]
    raw: torch.Tensor           # unclamped Gaussian draw, [B, A]
    log_prob: torch.Tensor      # log-density of the raw draw, [B]

def log_prob(mean: torch.Tensor, log_std: torch.Tensor, raw_action: torch.Tensor) -> torch.Tensor:
    return Normal(mean, log_std.exp().expand_as(mean)).log_prob(raw_action).sum(-1)

def sample_action(
    mean: torch.Tensor,
    log_std: torch.Tensor,
    generator: torch.Generator,
    bound: float,
) -> SampledAction:
    """Draw from N(mean, exp(log_std)^2), then clamp the draw to [-bound, bound]."""
    noise = torch.randn(mean.shape, generator=generator, dtype=mean.dtype)
    raw = mean + log_std.exp() * noise
    return SampledAction(
        action=raw.clamp(-bound, bound),
        raw=raw,
        log_prob=log_prob(mean, log_std, raw),
    )

def entropy(log_std: torch.Tensor) -> torch.Tensor:
    """Differential entropy of a diagonal Gaussian, summed over action dimensions."""
    return (log_std + HALF_LOG_2PI_E).sum()
