import torch
import torch.nn as nn
import torch.nn.functional as F


class Model(nn.Module):
    """Elementwise: torch.exp(x)."""

    def __init__(self):
        super(Model, self).__init__()

    def forward(self, x):
        return torch.exp(x)


M = 8192
N = 8192


def get_inputs():
    return [torch.randn(M, N)]


def get_init_inputs():
    return []
