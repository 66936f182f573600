import torch
import torch.nn as nn
import torch.nn.functional as F


class Model(nn.Module):
    """SwinMLP."""

    def __init__(self, num_classes: int):
        super(Model, self).__init__()
        self.embed = nn.Conv2d(3, 96, 4, stride=4)
        self.mlp = nn.Sequential(nn.Linear(96, 384), nn.GELU(), nn.Linear(384, 96))
        self.head = nn.Linear(96, num_classes)

    def forward(self, x):
        x = self.embed(x) if hasattr(self, "embed") else self.conv(x)
        x = x.flatten(2).transpose(1, 2)
        x = self.encoder(x) if hasattr(self, "encoder") else x + self.mlp(x)
        x = self.head(x.mean(dim=1))
        return x


batch_size = 2
num_classes = 1000


def get_inputs():
    return [torch.randn(batch_size, 3, 224, 224)]


def get_init_inputs():
    return [num_classes]
