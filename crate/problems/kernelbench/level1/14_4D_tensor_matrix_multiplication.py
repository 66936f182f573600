import torch
import torch.nn as nn
import torch.nn.functional as F


class Model(nn.Module):
    """Matrix multiplication, 4-D tensor by matrix."""

    def __init__(self):
        super(Model, self).__init__()

    def forward(self, A, B):
        return torch.einsum("bijl,lk->bijk", A, B)


b = 16
i = 256
j = 512
l = 256
k = 768


def get_inputs():
    return [torch.randn(b, i, j, l), torch.randn(l, k)]


def get_init_inputs():
    return []
