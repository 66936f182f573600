import torch
import torch.nn as nn
import torch.nn.functional as F


class Model(nn.Module):
    """Elementwise Tanh activation."""

    def __init__(self):
        super(Model, self).__init__()

    def forward(self, x):
        return torch.tanh(x)


batch_size = 4096
dim = 393216


def get_inputs():
    return [torch.randn(batch_size, dim)]


def get_init_inputs():
    return []
