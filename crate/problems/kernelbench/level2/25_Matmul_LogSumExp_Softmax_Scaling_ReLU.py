import torch
import torch.nn as nn
import torch.nn.functional as F


class Model(nn.Module):
    """Matmul followed by LogSumExp, Softmax, Scaling, ReLU."""

    def __init__(self, in_features: int, out_features: int, scale: float):
        super(Model, self).__init__()
        self.main = nn.Linear(in_features, out_features, bias=False)
        self.scale = scale

    def forward(self, x):
        x = self.main(x)
        x = torch.logsumexp(x, dim=1, keepdim=True)
        x = torch.softmax(x, dim=1)
        x = x * self.scale
        x = torch.relu(x)
        return x


batch_size = 128
in_features = 8192
out_features = 8192
scale = 0.5


def get_inputs():
    return [torch.randn(batch_size, in_features)]


def get_init_inputs():
    return [in_features, out_features, scale]
