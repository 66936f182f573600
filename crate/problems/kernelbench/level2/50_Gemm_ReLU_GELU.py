import torch
import torch.nn as nn
import torch.nn.functional as F


class Model(nn.Module):
    """Gemm followed by ReLU, GELU."""

    def __init__(self, in_features: int, out_features: int):
        super(Model, self).__init__()
        self.main = nn.Linear(in_features, out_features)

    def forward(self, x):
        x = self.main(x)
        x = torch.relu(x)
        x = F.gelu(x)
        return x


batch_size = 128
in_features = 8192
out_features = 8192


def get_inputs():
    return [torch.randn(batch_size, in_features)]


def get_init_inputs():
    return [in_features, out_features]
