from .network import LayerSpec, RecurrentState, PolicyOutput, RecurrentActorCritic, policy_forward, build_model
from .distributions import SampledAction, sample_action, log_prob, entropy
from .autodiff import backward, assign_gradients, finite_difference_gradients, gradient_mismatches
from .normalize import FEATURE_DIM, ObservationNormalizer
from .params import ParamSet, Checkpoint, save_checkpoint, load_checkpoint, check_architecture
