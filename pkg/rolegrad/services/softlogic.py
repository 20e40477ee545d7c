"""Differentiable relaxations of Boolean connectives.

Literals are predicted probabilities.  Connectives inside a rule use the
Gödel t-norm (min / max / 1-a); the top-level implication uses the product
t-norm residuum min(1, b/a), taken into log space as the hinge
max(0, log a - log b) so it sits on the same scale as cross-entropy.

Every function here is a pure tensor expression, so torch autograd yields
the exact derivative of the closed form.  Gödel min/max gather through an
explicit argmin/argmax, which routes the whole subgradient to the lowest
index on ties (torch.argmin/argmax return the first occurrence).
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import torch

from rolegrad.lib.error_utils import SoftLogicError

DEFAULT_EPSILON = 1e-6

TensorLike = torch.Tensor | Sequence[float] | Sequence[torch.Tensor] | float


def as_tensor(values: TensorLike, dtype: torch.dtype = torch.float64) -> torch.Tensor:
    """Convert floats, lists of floats or lists of 0-d tensors to a tensor.

    Lists of tensors are stacked so gradients flow back to each element.
    """
    if isinstance(values, torch.Tensor):
        return values
    if isinstance(values, Sequence) and values and isinstance(values[0], torch.Tensor):
        return torch.stack(list(values))  # type: ignore[arg-type]
    return torch.tensor(values, dtype=dtype)


def clamp(p: TensorLike, epsilon: float = DEFAULT_EPSILON) -> torch.Tensor:
    """Clamp probabilities into [epsilon, 1 - epsilon].

    Gradient is 1 strictly inside the rails and 0 beyond them.
    """
    if not 0 < epsilon < 0.5:
        raise SoftLogicError(f"clamp epsilon must lie in (0, 0.5), got {epsilon}")
    return torch.clamp(as_tensor(p), epsilon, 1.0 - epsilon)


def _gather(values: torch.Tensor, index: torch.Tensor, dim: int) -> torch.Tensor:
    return values.gather(dim, index.unsqueeze(dim)).squeeze(dim)


def _reduction_input(values: TensorLike, dim: int, name: str) -> torch.Tensor:
    values = as_tensor(values)
    if values.dim() == 0:
        raise SoftLogicError(f"{name} expects at least 1-d input, got a 0-d tensor")
    if values.shape[dim] == 0:
        raise SoftLogicError(f"empty {name}")
    return values


def godel_and(values: TensorLike, dim: int = -1) -> torch.Tensor:
    """Gödel conjunction: minimum along ``dim``.

    Raises:
        SoftLogicError: If ``values`` is 0-d or the reduced dimension is empty
    """
    values = _reduction_input(values, dim, "conjunction")
    return _gather(values, torch.argmin(values, dim=dim), dim)


def godel_or(values: TensorLike, dim: int = -1) -> torch.Tensor:
    """Gödel disjunction: maximum along ``dim``.

    Raises:
        SoftLogicError: If ``values`` is 0-d or the reduced dimension is empty
    """
    values = _reduction_input(values, dim, "disjunction")
    return _gather(values, torch.argmax(values, dim=dim), dim)


def godel_and2(a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    """Elementwise binary conjunction of equally shaped tensors (a wins ties)."""
    return godel_and(torch.stack(torch.broadcast_tensors(a, b), dim=-1))


def godel_or2(a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    """Elementwise binary disjunction of equally shaped tensors (a wins ties)."""
    return godel_or(torch.stack(torch.broadcast_tensors(a, b), dim=-1))


def negate(a: TensorLike) -> torch.Tensor:
    """Negation 1 - a."""
    return 1.0 - as_tensor(a)


def product_imply(a: TensorLike, b: TensorLike, epsilon: float = DEFAULT_EPSILON) -> torch.Tensor:
    """Product t-norm implication min(1, b / a), with ``a`` clamped away from 0.

    b >= a is exactly 1, so 0 -> 0 stays true on Boolean inputs.
    """
    a, b = as_tensor(a), as_tensor(b)
    ratio = torch.clamp(b / clamp(a, epsilon), max=1.0)
    return torch.where(b >= a, torch.ones_like(ratio), ratio)


def log_imply(log_a: torch.Tensor, log_b: torch.Tensor) -> torch.Tensor:
    """Log-space implication penalty max(0, log a - log b) from log-truth values."""
    return torch.relu(log_a - log_b)


@dataclass
class PenaltyTerm:
    """A nonnegative penalty and its gradient w.r.t. the input probabilities.

    ``loss`` stays attached to the autograd graph so training can backprop
    through it; ``gradient`` is computed on first access.
    """

    loss: torch.Tensor
    inputs: torch.Tensor
    _gradient: torch.Tensor | None = field(default=None, repr=False)

    @property
    def value(self) -> float:
        return float(self.loss.detach())

    @property
    def gradient(self) -> torch.Tensor:
        if self._gradient is None:
            if not self.loss.requires_grad:
                self._gradient = torch.zeros_like(self.inputs)
            else:
                (grad,) = torch.autograd.grad(
                    self.loss, self.inputs, retain_graph=True, allow_unused=True
                )
                self._gradient = torch.zeros_like(self.inputs) if grad is None else grad
        return self._gradient

    @classmethod
    def zero(cls, inputs: torch.Tensor) -> PenaltyTerm:
        """Vacuously satisfied rule: zero loss, zero gradient."""
        return cls(loss=inputs.new_zeros(()), inputs=inputs)


def track(probs: torch.Tensor) -> torch.Tensor:
    """Return ``probs`` ready for differentiation.

    Tensors already on a graph are kept; constants become fresh leaves so a
    ``PenaltyTerm`` can report gradients w.r.t. them.
    """
    if probs.requires_grad or not torch.is_grad_enabled():
        return probs
    return probs.detach().requires_grad_(True)


def imply_nll(
    a: TensorLike, b: TensorLike, epsilon: float = DEFAULT_EPSILON
) -> PenaltyTerm:
    """Log-space product implication a -> b as a penalty.

    Both inputs are clamped to [epsilon, 1 - epsilon]; the loss is
    max(0, log a - log b) with gradient (1/a, -1/b) while the hinge is
    active and zero otherwise.
    """
    x = track(torch.stack([as_tensor(a), as_tensor(b)]).to(torch.float64))
    ca, cb = clamp(x, epsilon).unbind()
    return PenaltyTerm(loss=log_imply(torch.log(ca), torch.log(cb)), inputs=x)
