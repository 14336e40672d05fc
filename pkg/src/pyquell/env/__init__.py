from .spaces import Observation, GoalSpec, TraceRow, HISTORY_LENGTH
from .reward import reward, goal_distance, trajectory_loss
from .vibration_env import VibrationEnv, EnvPool, OBSERVATION_DIM, sample_goal, draw_goal, episode_rng
