import torch
import torch.nn as nn
import torch.nn.functional as F


class Model(nn.Module):
    """Matmul followed by GELU, BatchNorm, HardSwish."""

    def __init__(self, in_features: int, out_features: int):
        super(Model, self).__init__()
        self.main = nn.Linear(in_features, out_features, bias=False)
        self.bn = nn.BatchNorm1d(out_features)

    def forward(self, x):
        x = self.main(x)
        x = F.gelu(x)
        x = self.bn(x)
        x = F.hardswish(x)
        return x


batch_size = 128
in_features = 8192
out_features = 8192


def get_inputs():
    return [torch.randn(batch_size, in_features)]


def get_init_inputs():
    return [in_features, out_features]
