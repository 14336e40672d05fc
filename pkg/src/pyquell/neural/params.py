"""
Parameter sets and checkpoints
==============================

A checkpoint is a numpy ``.npz`` archive holding

- ``__header__``: a JSON string with ``format``, ``layer_spec``, ``seed`` and
  ``step``;
- one float64 array per named network parameter (``dense.0.weight``, ...).

Arrays are stored without conversion, so loading reproduces every parameter
bit for bit.
"""

import json
import torch
import zipfile
import logging
import numpy as np
from pathlib import Path
from dataclasses import dataclass

from .network import LayerSpec, RecurrentActorCritic
from ..errors import ArchitectureMismatchError, CheckpointError, ShapeMismatchError

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT = 'pyquell-checkpoint/1'
HEADER_KEY = '__header__'

@dataclass
class ParamSet:
    spec: LayerSpec
    arrays: dict[str, np.ndarray]

    @classmethod
    def from_module(cls, model: RecurrentActorCritic) -> 'ParamSet':
        return cls(
            spec=model.spec,
            arrays={name: p.detach().cpu().numpy().copy() for name, p in model.named_parameters()},
        )

    def load_into(self, model: RecurrentActorCritic) -> None:
        check_architecture(self.spec, model.spec)
        with torch.no_grad():
            for name, p in model.named_parameters():
                if name not in self.arrays:
                    raise ShapeMismatchError(f'Parameter "{name}" missing from parameter set')
                array = self.arrays[name]
                if tuple(array.shape) != tuple(p.shape):
                    raise ShapeMismatchError(f'Parameter "{name}" has shape {array.shape}, expected {tuple(p.shape)}')
                p.copy_(torch.from_numpy(array))

@dataclass
class Checkpoint:
    params: ParamSet
    seed: int
    step: int

def check_architecture(found: LayerSpec, expected: LayerSpec) -> None:
    found_d, expected_d = found.as_dict(), expected.as_dict()
    differences = {
        key: (found_d[key], expected_d[key])
        for key in expected_d
        if found_d.get(key) != expected_d[key]
    }
    if differences:
        raise ArchitectureMismatchError(differences)

def save_checkpoint(path: Path, model: RecurrentActorCritic, seed: int, step: int) -> Path:
    params = ParamSet.from_module(model)
    header = {
        'format': CHECKPOINT_FORMAT,
        'layer_spec': params.spec.as_dict(),
        'seed': seed,
        'step': step,
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'wb') as f:
        np.savez(f, **{HEADER_KEY: np.array(json.dumps(header, sort_keys=True))}, **params.arrays)
    logger.info(f'Checkpoint written to {path} (step {step})')
    return path

def load_checkpoint(path: Path) -> Checkpoint:
    path = Path(path)
    try:
        with np.load(path, allow_pickle=False) as data:
            if HEADER_KEY not in data.files:
                raise CheckpointError(f'{path} has no {HEADER_KEY} entry')
            header = json.loads(str(data[HEADER_KEY]))
            arrays = {name: data[name].copy() for name in data.files if name != HEADER_KEY}
        if header.get('format') != CHECKPOINT_FORMAT:
            raise CheckpointError(f'Unsupported checkpoint format "{header.get("format")}" in {path}')
        return Checkpoint(
            params=ParamSet(spec=LayerSpec.from_dict(header['layer_spec']), arrays=arrays),
            seed=int(header['seed']),
            step=int(header['step']),
        )
    except CheckpointError:
        raise
    except (OSError, EOFError, ValueError, KeyError, TypeError, AttributeError, zipfile.BadZipFile) as e:
        # json.JSONDecodeError is a ValueError
        raise CheckpointError(f'Cannot load checkpoint {path}: {e!r}') from e
