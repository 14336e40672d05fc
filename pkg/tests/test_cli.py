import numpy as np
import pandas as pd
from pathlib import Path
from click.testing import CliRunner

from conftest import TINY_CONFIG
from pyquell.cli import cli

def invoke(*args: str):
    return CliRunner().invoke(cli, list(args))

def test_train_and_eval(tmp_path: Path):
    run_dir = tmp_path / 'run'
    result = invoke('train', '--config', str(TINY_CONFIG), '--output', str(run_dir))
    assert result.exit_code == 0, result.output
    assert (run_dir / 'metrics.csv').exists()

    result = invoke(
        'eval', str(run_dir / 'checkpoints' / 'final.npz'),
        '--config', str(TINY_CONFIG), '--episodes', '2', '--output', str(run_dir),
    )
    assert result.exit_code == 0, result.output
    assert len(pd.read_csv(run_dir / 'eval.csv')) == 2
    assert (run_dir / 'summary.json').exists()

def test_config_error_exit_code(tmp_path: Path):
    result = invoke('train', '--config', str(TINY_CONFIG), '--set', 'ppo.gamma=2', '--output', str(tmp_path))
    assert result.exit_code == 2
    assert 'error [config]' in result.output

def test_baseline(tmp_path: Path):
    result = invoke('baseline', '--config', str(TINY_CONFIG), '--output', str(tmp_path))
    assert result.exit_code == 0, result.output
    assert pd.read_csv(tmp_path / 'baseline.csv')['shaper'].tolist() == ['none', 'zv', 'zvd']

def test_baseline_infeasible_move(tmp_path: Path):
    result = invoke(
        'baseline', '--config', str(TINY_CONFIG), '--output', str(tmp_path),
        '--set', 'harness.move.v_peak=450',
    )
    assert result.exit_code == 3
    assert 'error [shaper]' in result.output

def test_simulate_reports_line_number(tmp_path: Path):
    commands = tmp_path / 'commands.txt'
    commands.write_text('0\n10\nten\n')
    result = invoke('simulate', str(commands), str(tmp_path / 'trace.csv'), '--config', str(TINY_CONFIG))
    assert result.exit_code == 7
    assert 'commands.txt:3' in result.output

def test_eval_architecture_mismatch(tmp_path: Path):
    run_dir = tmp_path / 'run'
    assert invoke('train', '--config', str(TINY_CONFIG), '--set', 'ppo.total_steps=0', '--output', str(run_dir)).exit_code == 0
    result = invoke(
        'eval', str(run_dir / 'checkpoints' / 'final.npz'), '--config', str(TINY_CONFIG),
        '--set', 'network.dense_sizes=[4, 4]', '--output', str(run_dir),
    )
    assert result.exit_code == 6
    assert 'dense_sizes' in result.output

def test_sensitivity(tmp_path: Path):
    output = tmp_path / 'curve.csv'
    result = invoke('sensitivity', str(output), '--shaper', 'zv', '--points', '11', '--config', str(TINY_CONFIG))
    assert result.exit_code == 0, result.output
    curve = pd.read_csv(output)
    assert list(curve.columns) == ['omega_rad_s', 'V']
    assert len(curve) == 11
    assert curve['V'].iloc[5] < 1e-12

def test_unloadable_checkpoint(tmp_path: Path):
    headerless = tmp_path / 'headerless.npz'
    np.savez(headerless, weight=np.zeros(3))
    garbage = tmp_path / 'garbage.npz'
    garbage.write_bytes(b'not an archive')
    for checkpoint in (headerless, garbage):
        result = invoke('eval', str(checkpoint), '--config', str(TINY_CONFIG), '--output', str(tmp_path / 'run'))
        assert result.exit_code == 8, result.output
        assert 'error [checkpoint]' in result.output

def test_simulate_reports_undecodable_line(tmp_path: Path):
    commands = tmp_path / 'commands.txt'
    commands.write_bytes(b'0\n10\n\xff\xfe\n')
    result = invoke('simulate', str(commands), str(tmp_path / 'trace.csv'), '--config', str(TINY_CONFIG))
    assert result.exit_code == 7
    assert 'commands.txt:3' in result.output
