import numpy as np

from ..errors import ShapeMismatchError

def gae(
    rewards: np.ndarray,
    values: np.ndarray,
    dones: np.ndarray,
    last_values: np.ndarray | float,
    gamma: float,
    lambda_gae: float,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Generalized advantage estimation over time-major arrays ([T] or [T, N]).

    rewards[t] is the reward received after acting at step t. dones[t] marks
    the last step of an episode; no value is bootstrapped across it.
    Returns (advantages, returns) with returns = advantages + values.
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    dones = np.asarray(dones, dtype=bool)
    if rewards.shape != values.shape or rewards.shape != dones.shape:
        raise ShapeMismatchError(
            f'Misaligned GAE inputs: rewards {rewards.shape}, values {values.shape}, dones {dones.shape}'
        )
    last_values = np.broadcast_to(np.asarray(last_values, dtype=np.float64), rewards.shape[1:])

    advantages = np.zeros_like(rewards)
    running = np.zeros(rewards.shape[1:], dtype=np.float64)
    for t in reversed(range(rewards.shape[0])):
        next_values = last_values if t == rewards.shape[0] - 1 else values[t + 1]
        nonterminal = 1.0 - dones[t]
        delta = rewards[t] + gamma * next_values * nonterminal - values[t]
        running = delta + gamma * lambda_gae * nonterminal * running
        advantages[t] = running
    return advantages, advantages + values

def discounted_returns(rewards: np.ndarray, gamma: float) -> np.ndarray:
    """Brute-force sum_k gamma^(k-t) r_k for a single episode."""
    rewards = np.asarray(rewards, dtype=np.float64)
    T = rewards.shape[0]
    return np.array([sum(gamma ** (k - t) * rewards[k] for k in range(t, T)) for t in range(T)])
