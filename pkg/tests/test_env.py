import pytest
from pathlib import Path
import numpy as np

from pyquell.dynamics import SystemState
from pyquell.env import (
    EnvPool, GoalSpec, Observation, VibrationEnv, OBSERVATION_DIM,
    goal_distance, reward, sample_goal, trajectory_loss,
)
from pyquell.errors import ConfigError, EpisodeProtocolError, RewardDomainError
from pyquell.harness import load_run_config
from pyquell.schemas import AxisParams, EpisodeConfig, RewardConfig, RunConfig

def make_env(horizon: int = 10, goal_range=(50.0, 450.0), **kwargs) -> VibrationEnv:
    return VibrationEnv(AxisParams(), EpisodeConfig(horizon=horizon, goal_range=goal_range), RewardConfig(), **kwargs)

class TestReward:
    cfg = RewardConfig()

    def test_exact_goal_is_in_band(self):
        assert reward(SystemState(x=100.0), 0.0, GoalSpec(x_g=100.0), self.cfg) == 0.0

    def test_inside_band(self):
        state, goal = SystemState(x=99.5), GoalSpec(x_g=100.0)
        assert goal_distance(state, 0.004 * self.cfg.y_ref, goal, self.cfg) == pytest.approx(0.009)
        assert reward(state, 0.004 * self.cfg.y_ref, goal, self.cfg) == 0.0

    def test_outside_band(self):
        assert reward(SystemState(x=98.0), 0.0, GoalSpec(x_g=100.0), self.cfg) == -1.0

    def test_reward_is_two_valued(self):
        rng = np.random.default_rng(7)
        xs = rng.uniform(0.0, 500.0, 100_000)
        y_hats = rng.exponential(0.01, 100_000)
        goals = rng.uniform(50.0, 450.0, 100_000)
        values = {reward(SystemState(x=x), y, GoalSpec(x_g=g), self.cfg) for x, y, g in zip(xs, y_hats, goals)}
        assert values <= {0.0, -1.0}

    def test_band_grows_with_threshold(self):
        rng = np.random.default_rng(1)
        narrow, wide = RewardConfig(threshold=0.005), RewardConfig(threshold=0.02)
        for x, y in zip(rng.uniform(95.0, 105.0, 2000), rng.uniform(0.0, 0.02, 2000)):
            if reward(SystemState(x=x), y, GoalSpec(x_g=100.0), narrow) == 0.0:
                assert reward(SystemState(x=x), y, GoalSpec(x_g=100.0), wide) == 0.0

    def test_domain_errors(self):
        with pytest.raises(RewardDomainError):
            reward(SystemState(x=1.0), float('nan'), GoalSpec(x_g=100.0), self.cfg)
        with pytest.raises(RewardDomainError):
            reward(SystemState(x=1.0), 0.0, GoalSpec(x_g=0.0), self.cfg)

    def test_absolute_mode_accepts_zero_goal(self):
        cfg = RewardConfig(position_error='absolute', x_ref=500.0)
        assert goal_distance(SystemState(x=2.5), 0.0, GoalSpec(x_g=0.0), cfg) == pytest.approx(0.005)

class TestTrajectoryLoss:
    def test_at_goal(self):
        assert trajectory_loss([SystemState(x=10.0)] * 4, GoalSpec(x_g=10.0)) == 0.0

    def test_pythagorean(self):
        assert trajectory_loss([SystemState(x=13.0, y=4.0)], GoalSpec(x_g=10.0)) == pytest.approx(25.0)

    def test_matches_accumulation(self):
        rng = np.random.default_rng(2)
        states = [SystemState(x=x, y=y) for x, y in rng.normal(size=(30, 2))]
        goal = GoalSpec(x_g=0.3)
        total = 0.0
        for s in states:
            total += (s.x - goal.x_g) ** 2 + s.y ** 2
        assert trajectory_loss(states, goal) == pytest.approx(total, rel=1e-12)

class TestGoals:
    def test_degenerate_range(self):
        cfg = EpisodeConfig(goal_range=(120.0, 120.0))
        assert {sample_goal(cfg, 0, k).x_g for k in range(20)} == {120.0}

    def test_same_index_same_goal(self):
        cfg = EpisodeConfig()
        assert sample_goal(cfg, 5, 17, env_index=2) == sample_goal(cfg, 5, 17, env_index=2)
        assert sample_goal(cfg, 5, 17) != sample_goal(cfg, 5, 18)

    def test_uniform_mean(self):
        cfg = EpisodeConfig(goal_range=(0.0, 500.0))
        goals = np.array([sample_goal(cfg, 0, k).x_g for k in range(10_000)])
        assert abs(goals.mean() - 250.0) <= 500.0 * 3.0 * np.sqrt(1.0 / 12.0) / 100.0
        assert np.all(goals != 0.0)

    def test_zero_only_range_needs_absolute_mode(self):
        with pytest.raises(ConfigError):
            make_env(goal_range=(0.0, 0.0)).reset()
        env = VibrationEnv(
            AxisParams(), EpisodeConfig(goal_range=(0.0, 0.0)),
            RewardConfig(position_error='absolute'),
        )
        _, goal = env.reset()
        assert goal.x_g == 0.0

class TestEnvironment:
    def test_spaces(self):
        env = make_env()
        assert env.observation_space.shape == (OBSERVATION_DIM,)
        assert env.action_space.high[0] == 400.0

    def test_action_is_clamped(self):
        env = make_env(record=True)
        env.reset()
        env.step(1000.0)
        assert env.trace[-1].action == 400.0

    def test_rest_at_goal(self):
        env = VibrationEnv(AxisParams(), EpisodeConfig(start_x=100.0, goal_range=(100.0, 100.0)), RewardConfig())
        obs, _ = env.reset()
        obs2, r, _ = env.step(0.0)
        assert r == 0.0
        assert (obs2.x, obs2.v, obs2.y_hist) == (obs.x, obs.v, obs.y_hist)

    def test_horizon(self):
        env = make_env(horizon=3)
        env.reset()
        assert [env.step(0.0)[2] for _ in range(3)] == [False, False, True]
        with pytest.raises(EpisodeProtocolError):
            env.step(0.0)

    def test_start_range_draws_per_episode(self):
        cfg = EpisodeConfig(start_range=(50.0, 450.0))
        env = VibrationEnv(AxisParams(), cfg, RewardConfig(), seed=4)
        starts = [env.reset(episode_index=k)[0].x for k in range(50)]
        assert all(50.0 <= x <= 450.0 for x in starts)
        assert len(set(starts)) == 50
        again = VibrationEnv(AxisParams(), cfg, RewardConfig(), seed=4)
        assert again.reset(episode_index=7)[0].x == starts[7]

    def test_default_config_spreads_starts_over_goal_range(self):
        config = load_run_config(Path(__file__).parent.parent / 'quell.config.yaml')
        assert config.episode.start_range == config.episode.goal_range

    def test_step_before_reset(self):
        with pytest.raises(EpisodeProtocolError):
            make_env().step(0.0)

    def test_history_is_fifo(self):
        env = make_env(horizon=20, record=True)
        env.reset()
        for k in range(8):
            obs, _, _ = env.step(300.0 if k < 3 else -300.0)
        assert obs.y_hist == tuple(s.y for s in env.states[-5:])

    def test_observation_hides_modal_parameters(self):
        fields = set(Observation.__dataclass_fields__)
        assert fields == {'x', 'v', 'y_hist', 'x_g'}

    def test_noise_only_touches_observed_history(self):
        clean = make_env(horizon=5, record=True, seed=3)
        noisy = make_env(horizon=5, record=True, seed=3, observation_noise_std=0.1)
        clean.reset(), noisy.reset()
        for _ in range(5):
            obs_c, r_c, _ = clean.step(200.0)
            obs_n, r_n, _ = noisy.step(200.0)
            assert r_c == r_n
        assert [s.y for s in clean.states] == [s.y for s in noisy.states]
        assert obs_c.y_hist != obs_n.y_hist

class TestPool:
    def test_auto_reset_and_returns(self):
        config = RunConfig(episode=EpisodeConfig(horizon=4))
        pool = EnvPool.from_config(config, n_envs=3, seed=0)
        pool.reset()
        finished = []
        for _ in range(8):
            _, rewards, dones, returns = pool.step(np.zeros(3))
            finished.extend(returns)
            assert set(rewards.tolist()) <= {0.0, -1.0}
        assert len(finished) == 6
        assert all(-4.0 <= ret <= 0.0 for ret in finished)
        assert [env.episode_index for env in pool.envs] == [2, 2, 2]

    def test_environments_draw_independent_goals(self):
        pool = EnvPool.from_config(RunConfig(), n_envs=4, seed=0)
        pool.reset()
        assert len({env.goal.x_g for env in pool.envs}) == 4
