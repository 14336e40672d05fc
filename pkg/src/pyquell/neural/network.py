import math
import torch
import logging
from torch import nn
from dataclasses import dataclass, asdict

from ..errors import ShapeMismatchError
from ..schemas.config import RunConfig

logger = logging.getLogger(__name__)

@dataclass(frozen=True)
class LayerSpec:
    obs_dim: int
    action_dim: int
    dense_sizes: tuple[int, ...]
    recurrent_size: int
    v_max: float

    @classmethod
    def from_config(cls, config: RunConfig, obs_dim: int, action_dim: int = 1) -> 'LayerSpec':
        return cls(
            obs_dim=obs_dim,
            action_dim=action_dim,
            dense_sizes=tuple(config.network.dense_sizes),
            recurrent_size=config.network.recurrent_size,
            v_max=config.axis.v_max,
        )

    @classmethod
    def from_dict(cls, d: dict) -> 'LayerSpec':
        return cls(
            obs_dim=int(d['obs_dim']),
            action_dim=int(d['action_dim']),
            dense_sizes=tuple(int(size) for size in d['dense_sizes']),
            recurrent_size=int(d['recurrent_size']),
            v_max=float(d['v_max']),
        )

    def as_dict(self) -> dict:
        d = asdict(self)
        d['dense_sizes'] = list(self.dense_sizes)
        return d

@dataclass(frozen=True)
class RecurrentState:
    """Hidden and cell vectors of the recurrent layer, batch-first."""
    h: torch.Tensor
    c: torch.Tensor

    @classmethod
    def zeros(cls, batch: int, size: int, dtype: torch.dtype = torch.float64) -> 'RecurrentState':
        return cls(h=torch.zeros(batch, size, dtype=dtype), c=torch.zeros(batch, size, dtype=dtype))

    def reset_where(self, mask: torch.Tensor) -> 'RecurrentState':
        """Zero the state of every batch entry whose episode starts here."""
        keep = (~mask).to(self.h.dtype).unsqueeze(-1)
        return RecurrentState(h=self.h * keep, c=self.c * keep)

    def detach(self) -> 'RecurrentState':
        return RecurrentState(h=self.h.detach().clone(), c=self.c.detach().clone())

@dataclass
class PolicyOutput:
    mean: torch.Tensor          # [T, B, A]
    log_std: torch.Tensor       # [A]
    value: torch.Tensor         # [T, B]
    state: RecurrentState

def _init_linear(layer: nn.Linear, gain: float) -> nn.Linear:
    nn.init.orthogonal_(layer.weight, gain)
    nn.init.zeros_(layer.bias)
    return layer

class RecurrentActorCritic(nn.Module):
    """
    Dense tanh layers feeding one LSTM cell, with a Gaussian policy head
    (state-independent log-std, mean saturated to +-v_max) and a value head.
    """

    def __init__(self, spec: LayerSpec, log_std_init: float, seed: int = 0):
        super().__init__()
        self.spec = spec

        with torch.random.fork_rng(devices=[]):
            torch.manual_seed(seed)
            sizes = (spec.obs_dim, *spec.dense_sizes)
            self.dense = nn.ModuleList(
                _init_linear(nn.Linear(n_in, n_out), math.sqrt(2.0))
                for n_in, n_out in zip(sizes[:-1], sizes[1:])
            )
            self.lstm = nn.LSTMCell(sizes[-1], spec.recurrent_size)
            nn.init.orthogonal_(self.lstm.weight_ih)
            nn.init.orthogonal_(self.lstm.weight_hh)
            nn.init.zeros_(self.lstm.bias_ih)
            nn.init.zeros_(self.lstm.bias_hh)
            self.policy_head = _init_linear(nn.Linear(spec.recurrent_size, spec.action_dim), 0.01)
            self.value_head = _init_linear(nn.Linear(spec.recurrent_size, 1), 1.0)

        self.log_std = nn.Parameter(torch.full((spec.action_dim,), float(log_std_init)))
        self.double()

    def initial_state(self, batch: int) -> RecurrentState:
        return RecurrentState.zeros(batch, self.spec.recurrent_size, dtype=self.log_std.dtype)

    def step(self, obs: torch.Tensor, state: RecurrentState) -> tuple[torch.Tensor, torch.Tensor, RecurrentState]:
        """One time step: obs [B, D] -> (mean [B, A], value [B], next state)."""
        z = obs
        for layer in self.dense:
            z = torch.tanh(layer(z))
        h, c = self.lstm(z, (state.h, state.c))
        mean = self.spec.v_max * torch.tanh(self.policy_head(h))
        value = self.value_head(h).squeeze(-1)
        return mean, value, RecurrentState(h=h, c=c)

    def forward(
        self,
        obs_seq: torch.Tensor,
        state: RecurrentState,
        starts: torch.Tensor | None = None,
    ) -> PolicyOutput:
        if obs_seq.dim() != 3 or obs_seq.shape[-1] != self.spec.obs_dim:
            raise ShapeMismatchError(
                f'Expected observations of shape [T, B, {self.spec.obs_dim}], got {list(obs_seq.shape)}'
            )
        if state.h.shape != (obs_seq.shape[1], self.spec.recurrent_size):
            raise ShapeMismatchError(
                f'Recurrent state of shape {list(state.h.shape)} does not match batch {obs_seq.shape[1]}'
            )

        # Time steps are processed one by one so that splitting a sequence and
        # carrying the state reproduces the unsplit result exactly
        means, values = [], []
        for t in range(obs_seq.shape[0]):
            if starts is not None:
                state = state.reset_where(starts[t])
            mean, value, state = self.step(obs_seq[t], state)
            means.append(mean)
            values.append(value)

        if means:
            mean_seq, value_seq = torch.stack(means), torch.stack(values)
        else:
            batch = obs_seq.shape[1]
            mean_seq = obs_seq.new_zeros(0, batch, self.spec.action_dim)
            value_seq = obs_seq.new_zeros(0, batch)
        return PolicyOutput(mean=mean_seq, log_std=self.log_std, value=value_seq, state=state)

def policy_forward(
    model: RecurrentActorCritic,
    obs_seq: torch.Tensor,
    state: RecurrentState,
    starts: torch.Tensor | None = None,
) -> PolicyOutput:
    return model(obs_seq, state, starts)

def build_model(config: RunConfig, obs_dim: int) -> RecurrentActorCritic:
    spec = LayerSpec.from_config(config, obs_dim)
    return RecurrentActorCritic(spec, config.log_std_init, seed=config.init_seed)
