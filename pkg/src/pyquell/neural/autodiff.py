import re
import torch
import logging
from torch import nn
from typing import Callable

from ..errors import NonFiniteError

logger = logging.getLogger(__name__)

def backward(loss: torch.Tensor, model: nn.Module, detect_anomaly: bool = False) -> dict[str, torch.Tensor]:
    """
    Reverse-mode gradients of a scalar loss with respect to every named
    parameter of the model. Parameters the loss does not depend on get zero
    gradients. Non-finite losses or gradients raise NonFiniteError naming the
    offending node.
    """
    named = list(model.named_parameters())
    if not loss.requires_grad:
        return {name: torch.zeros_like(p) for name, p in named}
    if not torch.isfinite(loss).all():
        raise NonFiniteError(f'Loss is not finite: {loss.item()}', node='loss')

    try:
        with torch.autograd.set_detect_anomaly(detect_anomaly):
            grads = torch.autograd.grad(loss, [p for _, p in named], allow_unused=True)
    except RuntimeError as e:
        # Anomaly mode reports the backward function that produced the non-finite value
        match = re.search(r"Function '(\w+)'", str(e))
        raise NonFiniteError(f'Non-finite intermediate during backward: {e}', node=match.group(1) if match else None) from e

    gradients: dict[str, torch.Tensor] = {}
    for (name, p), g in zip(named, grads):
        g = torch.zeros_like(p) if g is None else g
        if not torch.isfinite(g).all():
            raise NonFiniteError(f'Gradient of parameter "{name}" is not finite', node=name)
        gradients[name] = g
    return gradients

def assign_gradients(model: nn.Module, gradients: dict[str, torch.Tensor]) -> None:
    for name, p in model.named_parameters():
        p.grad = gradients[name].detach().clone()

@torch.no_grad()
def finite_difference_gradients(
    loss_fn: Callable[[], torch.Tensor],
    model: nn.Module,
    h_rel: float = 1e-5,
) -> dict[str, torch.Tensor]:
    """Central finite differences with step h_rel * max(1, |w|) for every parameter entry."""
    gradients: dict[str, torch.Tensor] = {}
    for name, p in model.named_parameters():
        grad = torch.zeros_like(p)
        flat, flat_grad = p.view(-1), grad.view(-1)
        for i in range(flat.numel()):
            w = flat[i].item()
            h = h_rel * max(1.0, abs(w))
            flat[i] = w + h
            upper = loss_fn().item()
            flat[i] = w - h
            lower = loss_fn().item()
            flat[i] = w
            flat_grad[i] = (upper - lower) / (2.0 * h)
        gradients[name] = grad
    return gradients

def gradient_mismatches(
    analytic: dict[str, torch.Tensor],
    numeric: dict[str, torch.Tensor],
    rtol: float = 1e-4,
    floor: float = 1e-6,
) -> dict[str, float]:
    """Worst relative error per parameter that exceeds rtol; empty when all agree."""
    failures: dict[str, float] = {}
    for name, a in analytic.items():
        n = numeric[name]
        scale = torch.maximum(torch.maximum(a.abs(), n.abs()), torch.full_like(a, floor))
        worst = ((a - n).abs() / scale).max().item() if a.numel() else 0.0
        if worst > rtol:
            failures[name] = worst
    return failures
