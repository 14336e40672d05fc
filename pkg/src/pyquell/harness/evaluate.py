import torch
import logging
import numpy as np
from pathlib import Path
from typing import Sequence

from .io import write_csv, write_json
from .run import RunDirectory
from ..env import GoalSpec, VibrationEnv, trajectory_loss
from ..neural import FEATURE_DIM, LayerSpec, ObservationNormalizer, RecurrentActorCritic, build_model, check_architecture, load_checkpoint
from ..schemas.config import RunConfig
from ..schemas.report import EpisodeMetrics, EvalReport, EvalSummary

logger = logging.getLogger(__name__)

TAIL_STEPS = 100
SUCCESS_TAIL_FRACTION = 0.6

EVAL_COLUMNS = list(EpisodeMetrics.model_fields)

@torch.no_grad()
def run_policy_episode(
    model: RecurrentActorCritic,
    normalizer: ObservationNormalizer,
    env: VibrationEnv,
    episode_index: int | None = None,
    goal: GoalSpec | None = None,
) -> list[float]:
    """Play one episode with the policy mean as action. Returns the reward series."""
    obs, _ = env.reset(episode_index=episode_index, goal=goal)
    state = model.initial_state(1)
    rewards: list[float] = []
    done = False
    while not done:
        x = torch.from_numpy(normalizer.normalize(obs)).unsqueeze(0)
        mean, _, state = model.step(x, state)
        obs, r, done = env.step(float(mean[0, 0]))
        rewards.append(r)
    return rewards

def settling_step(rewards: Sequence[float], in_band_reward: float) -> int | None:
    """First step index from which every reward is in band, None if the episode ends out of band."""
    out_of_band = [i for i, r in enumerate(rewards) if r != in_band_reward]
    if not out_of_band:
        return 0
    settle = out_of_band[-1] + 1
    return settle if settle < len(rewards) else None

def tail_in_band_fraction(rewards: Sequence[float], in_band_reward: float, tail: int = TAIL_STEPS) -> float:
    window = np.asarray(rewards[-tail:], dtype=np.float64)
    return float(np.mean(window == in_band_reward)) if window.size else 0.0

def episode_metrics(episode: int, env: VibrationEnv, rewards: Sequence[float], in_band_reward: float) -> EpisodeMetrics:
    final = env.state
    return EpisodeMetrics(
        episode=episode,
        goal_x=env.goal.x_g,
        final_position_error=abs(final.x - env.goal.x_g),
        residual_envelope=env.last_envelope,
        settling_step=settling_step(rewards, in_band_reward),
        episode_return=float(sum(rewards)),
        trajectory_loss=trajectory_loss(env.states, env.goal),
        tail_in_band_fraction=tail_in_band_fraction(rewards, in_band_reward),
    )

def summarize(checkpoint: str, episodes: list[EpisodeMetrics]) -> EvalSummary:
    if not episodes:
        return EvalSummary(checkpoint=checkpoint, episodes=0, tail_steps=TAIL_STEPS)
    tails = np.array([m.tail_in_band_fraction for m in episodes])
    return EvalSummary(
        checkpoint=checkpoint,
        episodes=len(episodes),
        tail_steps=TAIL_STEPS,
        mean_final_position_error=float(np.mean([m.final_position_error for m in episodes])),
        mean_residual_envelope=float(np.mean([m.residual_envelope for m in episodes])),
        mean_episode_return=float(np.mean([m.episode_return for m in episodes])),
        mean_tail_in_band_fraction=float(np.mean(tails)),
        success_fraction=float(np.mean(tails >= SUCCESS_TAIL_FRACTION)),
    )

def evaluate_model(model: RecurrentActorCritic, config: RunConfig, n_episodes: int, checkpoint: str = '') -> EvalReport:
    normalizer = ObservationNormalizer.from_config(config)
    env = VibrationEnv.from_config(config, seed=config.harness.eval_seed, record=True)
    in_band = config.reward.in_band_reward

    episodes = []
    for k in range(n_episodes):
        rewards = run_policy_episode(model, normalizer, env, episode_index=k)
        episodes.append(episode_metrics(k, env, rewards, in_band))
    return EvalReport(summary=summarize(checkpoint, episodes), episodes=episodes)

def cmd_eval(checkpoint: Path, config: RunConfig, n_episodes: int | None = None, output_dir: Path | None = None) -> EvalReport:
    """
    Deterministic evaluation of a checkpoint on goals drawn from the evaluation
    stream. Writes eval.csv and summary.json into the run directory.
    """
    n_episodes = config.harness.eval_episodes if n_episodes is None else n_episodes
    run = (RunDirectory(output_dir) if output_dir is not None else RunDirectory.for_config(config)).prepare()

    ckpt = load_checkpoint(checkpoint)
    check_architecture(ckpt.params.spec, LayerSpec.from_config(config, FEATURE_DIM))
    model = build_model(config, FEATURE_DIM)
    ckpt.params.load_into(model)
    logger.info(f'Evaluating {checkpoint} (step {ckpt.step}) on {n_episodes} episodes')

    report = evaluate_model(model, config, n_episodes, checkpoint=str(checkpoint))
    write_csv(run.eval_path, report.episodes, EVAL_COLUMNS)
    write_json(run.summary_path, report.summary)

    s = report.summary
    if s.episodes:
        logger.info(
            f'Evaluation: mean final error {s.mean_final_position_error:.3f} mm, '
            f'mean residual envelope {s.mean_residual_envelope:.4f} mm, '
            f'success fraction {s.success_fraction:.2f}'
        )
    return report
