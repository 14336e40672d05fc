import os
import json
import math
import torch
import pytest
import numpy as np
import pandas as pd
from pathlib import Path

from conftest import TINY_CONFIG
from pyquell.env import VibrationEnv
from pyquell.errors import ArchitectureMismatchError, CommandFileError, ConfigError, InfeasibleMoveError
from pyquell.harness import (
    RunDirectory, baseline_table, cmd_baseline, cmd_eval, cmd_simulate, cmd_train,
    SmoothedSeries, evaluate_model, load_run_config, run_policy_episode, settling_step, tail_in_band_fraction,
)
from pyquell.neural import FEATURE_DIM, ObservationNormalizer, build_model, save_checkpoint
from pyquell.schemas import AxisParams, MoveSpec, RunConfig

DEFAULT_CONFIG = Path(__file__).parent.parent / 'quell.config.yaml'

def tiny(tmp_path: Path, *overrides: str) -> RunConfig:
    return load_run_config(TINY_CONFIG, [f'output_dir={tmp_path}', *overrides])

class TestConfig:
    def test_overrides_apply_before_validation(self, tmp_path):
        config = tiny(tmp_path, 'ppo.gamma=0.9', 'harness.shapers=[zv]', 'axis.travel=[0, 600]')
        assert config.ppo.gamma == 0.9
        assert config.harness.shapers == ('zv',)
        assert config.axis.travel == (0.0, 600.0)

    def test_unknown_key_is_config_error(self, tmp_path):
        with pytest.raises(ConfigError):
            tiny(tmp_path, 'ppo.gama=0.9')

    def test_inconsistent_values(self, tmp_path):
        with pytest.raises(ConfigError):
            tiny(tmp_path, 'episode.goal_range=[50, 900]')
        with pytest.raises(ConfigError):
            tiny(tmp_path, 'axis.dt_physics=0.003')
        with pytest.raises(ConfigError):
            tiny(tmp_path, 'ppo.n_steps=6')

    def test_missing_explicit_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_run_config(tmp_path / 'absent.yaml')

    def test_malformed_override(self, tmp_path):
        with pytest.raises(ConfigError):
            tiny(tmp_path, 'ppo.gamma')

class TestTrain:
    def test_zero_steps(self, tmp_path):
        root = cmd_train(tiny(tmp_path, 'ppo.total_steps=0'))
        run = RunDirectory(root)
        assert run.checkpoint_path(0).exists()
        assert run.final_checkpoint_path.exists()
        metrics = pd.read_csv(run.metrics_path)
        assert len(metrics) == 0
        assert 'mean_episode_reward' in metrics.columns

    def test_run_layout(self, tmp_path):
        config = tiny(tmp_path)
        run = RunDirectory(cmd_train(config))
        assert load_run_config(run.config_path) == config
        assert sorted(p.name for p in run.checkpoint_dir.iterdir()) == [
            'final.npz', 'step-000000000.npz', 'step-000000016.npz', 'step-000000032.npz',
        ]
        for name in ('episode_reward.csv', 'deflection.csv', 'action.csv', 'entropy.csv', 'probe_trace.csv'):
            assert (run.series_dir / name).exists(), name
        assert len(pd.read_csv(run.metrics_path)) == 2
        assert len(pd.read_csv(run.series_dir / 'deflection.csv')) == config.episode.horizon
        assert run.log_path.read_text()

        entropy = pd.read_csv(run.series_dir / 'entropy.csv')
        assert list(entropy.columns) == ['step', 'entropy', 'entropy_smoothed']
        expected = entropy['entropy'].rolling(config.harness.entropy_window, min_periods=1).mean()
        np.testing.assert_allclose(entropy['entropy_smoothed'], expected, rtol=1e-12)

    def test_smoothed_series_tracks_rises(self, caplog):
        series = SmoothedSeries(window=2)
        rows = [series.row(step, value) for step, value in enumerate([4.0, 2.0, 2.0, 3.0])]
        assert [r['entropy_smoothed'] for r in rows] == [4.0, 3.0, 2.0, 2.5]
        assert series.max_rise == 0.5
        with caplog.at_level('WARNING', logger='pyquell'):
            series.report()
        assert 'not monotone' in caplog.text

    def test_metrics_are_byte_identical(self, tmp_path):
        a = RunDirectory(cmd_train(tiny(tmp_path / 'a')))
        b = RunDirectory(cmd_train(tiny(tmp_path / 'b')))
        assert a.metrics_path.read_bytes() == b.metrics_path.read_bytes()

    def test_rerun_from_archived_config(self, tmp_path):
        first = RunDirectory(cmd_train(tiny(tmp_path / 'first')))
        archived = load_run_config(first.config_path, [f'output_dir={tmp_path / "second"}'])
        second = RunDirectory(cmd_train(archived))
        assert first.metrics_path.read_bytes() == second.metrics_path.read_bytes()

    @pytest.mark.skipif(os.name == 'nt' or os.geteuid() == 0, reason='needs a non-root POSIX user')
    def test_unwritable_output_fails_before_training(self, tmp_path):
        locked = tmp_path / 'locked'
        locked.mkdir()
        locked.chmod(0o500)
        try:
            with pytest.raises(ConfigError):
                cmd_train(tiny(locked / 'run'))
        finally:
            locked.chmod(0o700)

class TestEval:
    def test_zero_episodes(self, tmp_path):
        config = tiny(tmp_path)
        path = save_checkpoint(tmp_path / 'ckpt.npz', build_model(config, FEATURE_DIM), 0, 0)
        report = cmd_eval(path, config, n_episodes=0)
        assert report.episodes == []
        assert report.summary.episodes == 0
        assert json.loads((tmp_path / 'summary.json').read_text())['episodes'] == 0

    def test_zero_policy_does_not_move(self, tmp_path):
        config = tiny(tmp_path)
        model = build_model(config, FEATURE_DIM)
        with torch.no_grad():
            for p in model.parameters():
                p.zero_()
        report = evaluate_model(model, config, n_episodes=3)
        assert len(report.episodes) == 3
        for m in report.episodes:
            assert m.final_position_error == pytest.approx(abs(m.goal_x - config.episode.start_x))
            assert m.residual_envelope == 0.0
            assert m.settling_step is None
            assert m.episode_return == -config.episode.horizon

    def test_report_files(self, tmp_path):
        config = tiny(tmp_path)
        path = save_checkpoint(tmp_path / 'ckpt.npz', build_model(config, FEATURE_DIM), 0, 0)
        report = cmd_eval(path, config, n_episodes=2)
        frame = pd.read_csv(tmp_path / 'eval.csv')
        assert len(frame) == 2
        assert frame['goal_x'].tolist() == pytest.approx([m.goal_x for m in report.episodes], rel=1e-12)
        assert all(math.isfinite(v) for v in frame['trajectory_loss'])

    def test_goal_error_features_admit_a_settling_controller(self, tmp_path):
        config = load_run_config(DEFAULT_CONFIG, [f'output_dir={tmp_path}'])
        normalizer = ObservationNormalizer.from_config(config)
        env = VibrationEnv.from_config(config, seed=config.harness.eval_seed)
        for episode in range(5):
            obs, _ = env.reset(episode_index=episode)
            rewards, done = [], False
            while not done:
                # proportional velocity command on the goal error feature
                error = normalizer.normalize(obs)[-2] * config.axis.span
                obs, r, done = env.step(10.0 * error)
                rewards.append(r)
            assert tail_in_band_fraction(rewards, config.reward.in_band_reward) == 1.0

    def test_architecture_mismatch(self, tmp_path):
        config = tiny(tmp_path)
        path = save_checkpoint(tmp_path / 'ckpt.npz', build_model(config, FEATURE_DIM), 0, 0)
        with pytest.raises(ArchitectureMismatchError) as info:
            cmd_eval(path, tiny(tmp_path, 'network.recurrent_size=5'), n_episodes=1)
        assert 'recurrent_size' in str(info.value)

    def test_settling_step_consistent_with_rewards(self, tmp_path):
        assert settling_step([-1.0, 0.0, -1.0, 0.0, 0.0], 0.0) == 3
        assert settling_step([0.0, 0.0], 0.0) == 0
        assert settling_step([0.0, -1.0], 0.0) is None

        config = tiny(tmp_path, 'episode.horizon=60', 'episode.start_x=200', 'episode.goal_range=[200, 200]')
        model = build_model(config, FEATURE_DIM)
        env = VibrationEnv.from_config(config, seed=0, record=True)
        rewards = run_policy_episode(model, ObservationNormalizer.from_config(config), env, episode_index=0)
        settle = settling_step(rewards, config.reward.in_band_reward)
        if settle is not None:
            assert all(r == 0.0 for r in rewards[settle:])

class TestBaseline:
    def test_shaper_ordering(self, tmp_path):
        rows = {row.shaper: row for row in cmd_baseline(tiny(tmp_path))}
        none, zv, zvd = rows['none'], rows['zv'], rows['zvd']
        assert none.residual_envelope > 0.0
        assert zvd.residual_envelope <= 0.01 * none.residual_envelope
        assert zv.residual_envelope < none.residual_envelope
        assert (tmp_path / 'baseline.csv').exists()

    def test_default_deflection_is_micrometre_scale(self, tmp_path):
        none = baseline_table(tiny(tmp_path)).pop(0)
        assert none.shaper == 'none'
        assert 1e-3 < none.residual_envelope < 1e-2
        # deflection is linear in the coupling, x is not affected by it
        stiff = baseline_table(tiny(tmp_path, 'axis.coupling_k=0.2')).pop(0)
        assert stiff.residual_envelope == pytest.approx(100.0 * none.residual_envelope, rel=1e-9)

    def test_zvd_is_longer_by_half_period(self, tmp_path):
        config = tiny(tmp_path)
        rows = {row.shaper: row for row in baseline_table(config)}
        half_period = math.pi / config.axis.damped_omega
        assert rows['zvd'].move_duration - rows['zv'].move_duration == pytest.approx(half_period, abs=config.axis.dt_physics)

    @pytest.mark.parametrize('scale', [0.8, 1.2])
    def test_zvd_robust_to_frequency_error(self, tmp_path, scale: float):
        rows = {row.shaper: row for row in baseline_table(tiny(tmp_path, f'harness.model_omega_scale={scale}'))}
        assert rows['zvd'].residual_envelope <= rows['zv'].residual_envelope

    def test_infeasible_move(self, tmp_path):
        with pytest.raises(InfeasibleMoveError):
            baseline_table(tiny(tmp_path), MoveSpec(v_peak=500.0))

class TestSimulate:
    def test_zero_commands(self, tmp_path):
        commands = tmp_path / 'zeros.txt'
        commands.write_text('0\n0.0\n\n# idle\n0\n')
        states = cmd_simulate(tiny(tmp_path), commands, tmp_path / 'trace.csv')
        frame = pd.read_csv(tmp_path / 'trace.csv')
        assert list(frame.columns) == ['t', 'x', 'v', 'y']
        assert len(states) == len(frame) == 3
        assert (frame[['x', 'v', 'y']] == 0.0).all().all()

    def test_empty_file(self, tmp_path):
        commands = tmp_path / 'empty.txt'
        commands.write_text('')
        assert cmd_simulate(tiny(tmp_path), commands, tmp_path / 'trace.csv') == []
        assert len(pd.read_csv(tmp_path / 'trace.csv')) == 0

    def test_step_command_follows_first_order_lag(self, tmp_path):
        commands = tmp_path / 'step.txt'
        commands.write_text('100\n' * 10)
        states = cmd_simulate(tiny(tmp_path), commands, tmp_path / 'trace.csv')
        axis = AxisParams()
        t = np.array([s.t for s in states])
        v = np.array([s.v for s in states])
        np.testing.assert_allclose(v, 100.0 * (1.0 - np.exp(-t / axis.tau_v)), rtol=1e-5)
        assert states[0].y < 0.0   # the mode deflects against the acceleration

    def test_undecodable_line(self, tmp_path):
        commands = tmp_path / 'latin.txt'
        commands.write_bytes(b'0\n10\n\xff\xfe\n')
        with pytest.raises(CommandFileError) as info:
            cmd_simulate(tiny(tmp_path), commands, tmp_path / 'trace.csv')
        assert info.value.line == 3
        assert 'UTF-8' in str(info.value)

    def test_malformed_line(self, tmp_path):
        commands = tmp_path / 'bad.txt'
        commands.write_text('1.0\n# comment\nfast\n')
        with pytest.raises(CommandFileError) as info:
            cmd_simulate(tiny(tmp_path), commands, tmp_path / 'trace.csv')
        assert info.value.line == 3

LEARNING_SEEDS = (0, 1, 2)

def learning_failures(config: RunConfig) -> list[str]:
    run = RunDirectory(cmd_train(config))
    failures = []
    metrics = pd.read_csv(run.metrics_path).dropna(subset=['mean_episode_reward'])
    initial, final = metrics['mean_episode_reward'].iloc[0], metrics['mean_episode_reward'].iloc[-1]
    if final < initial + 0.6 * abs(initial):
        failures.append(f'mean episode reward {initial:.1f} -> {final:.1f}')

    smoothed = pd.read_csv(run.series_dir / 'entropy.csv')['entropy_smoothed'].to_numpy()
    if np.any(np.diff(smoothed) > 1e-3):
        failures.append(f'smoothed entropy rises by {np.max(np.diff(smoothed)):.2e}')

    report = cmd_eval(run.final_checkpoint_path, config, n_episodes=50)
    passing = sum(m.tail_in_band_fraction >= 0.6 for m in report.episodes)
    if passing < 0.8 * 50:
        failures.append(f'{passing}/50 evaluation episodes in band')
    return failures

@pytest.mark.slow
def test_desk_scale_learning(tmp_path):
    # seed 0 first, two fallback seeds allowed
    outcomes = {}
    for seed in LEARNING_SEEDS:
        config = load_run_config(DEFAULT_CONFIG, [f'seed={seed}', f'output_dir={tmp_path / f"seed-{seed}"}'])
        outcomes[seed] = learning_failures(config)
        if not outcomes[seed]:
            return
    pytest.fail(f'no seed learned the default task: {outcomes}')
