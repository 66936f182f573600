import torch
import torch.nn as nn


class Model(nn.Module):
    """Element-wise addition of two tensors."""

    def __init__(self) -> None:
        super().__init__()

    def forward(self, a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
        return a + b


N = 1 << 20


def get_inputs():
    a = torch.randn(N)
    b = torch.randn(N)
    return [a, b]


def get_init_inputs():
    return []
