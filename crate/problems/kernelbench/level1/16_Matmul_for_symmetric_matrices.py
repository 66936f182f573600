import torch
import torch.nn as nn
import torch.nn.functional as F


class Model(nn.Module):
    """Matrix multiplication, symmetric operands."""

    def __init__(self):
        super(Model, self).__init__()

    def forward(self, A, B):
        return torch.matmul(A, B)


N = 4096


def get_inputs():
    return [(lambda a: (a + a.T) / 2)(torch.randn(N, N)), (lambda b: (b + b.T) / 2)(torch.randn(N, N))]


def get_init_inputs():
    return []
