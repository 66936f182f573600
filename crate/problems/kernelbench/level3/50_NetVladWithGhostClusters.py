import torch
import torch.nn as nn
import torch.nn.functional as F


class Model(nn.Module):
    """NetVladWithGhostClusters."""

    def __init__(self):
        super(Model, self).__init__()
        self.clusters = nn.Parameter(torch.randn(512, 32 + 16) * 0.02)
        self.bn = nn.BatchNorm1d(32 + 16)

    def forward(self, x):
        a = torch.softmax(self.bn((x @ self.clusters).flatten(0, 1)), dim=-1)[:, :32]
        x = (a.unsqueeze(-1) * x.flatten(0, 1).unsqueeze(1)).sum(0)
        x = F.normalize(x.flatten(), dim=0)
        return x


batch_size = 32
num_features = 100


def get_inputs():
    return [torch.randn(batch_size, num_features, 512)]


def get_init_inputs():
    return []
