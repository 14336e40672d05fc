from .state import SystemState
from .axis import FlexibleAxis, step, envelope, envelope_window, modal_energy, modal_amplitude, rk4_step, clamp_command
