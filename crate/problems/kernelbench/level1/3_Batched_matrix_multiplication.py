import torch
import torch.nn as nn
import torch.nn.functional as F


class Model(nn.Module):
    """Matrix multiplication, batched."""

    def __init__(self):
        super(Model, self).__init__()

    def forward(self, A, B):
        return torch.bmm(A, B)


batch_size = 128
M = 128
K = 256
N = 512


def get_inputs():
    return [torch.randn(batch_size, M, K), torch.randn(batch_size, K, N)]


def get_init_inputs():
    return []
