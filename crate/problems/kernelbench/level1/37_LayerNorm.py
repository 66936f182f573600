import torch
import torch.nn as nn
import torch.nn.functional as F


class Model(nn.Module):
    """LayerNorm over a 4-D activation tensor."""

    def __init__(self, num_features: int):
        super(Model, self).__init__()
        self.norm = nn.LayerNorm((num_features, dim1, dim2))

    def forward(self, x):
        return self.norm(x)


batch_size = 112
num_features = 64
dim1 = 512
dim2 = 512


def get_inputs():
    return [torch.randn(batch_size, num_features, dim1, dim2)]


def get_init_inputs():
    return [num_features]
