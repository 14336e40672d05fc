from .run import RunDirectory, load_run_config, apply_overrides, dump_run_config, resolve_output_dir
from .io import CsvLog, write_csv, write_json
from .train import SmoothedSeries, cmd_train, probe_goal
from .evaluate import cmd_eval, evaluate_model, run_policy_episode, settling_step, tail_in_band_fraction
from .baseline import cmd_baseline, cmd_sensitivity, baseline_table, measured_residual_ratio, simulate_move
from .simulate import cmd_simulate, read_commands, simulate_commands
