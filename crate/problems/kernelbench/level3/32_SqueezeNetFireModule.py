import torch
import torch.nn as nn
import torch.nn.functional as F


class Model(nn.Module):
    """SqueezeNetFireModule."""

    def __init__(self, in_channels: int):
        super(Model, self).__init__()
        self.squeeze = nn.Sequential(nn.Conv2d(in_channels, 6, 1), nn.ReLU())
        self.expand1x1 = nn.Sequential(nn.Conv2d(6, 64, 1), nn.ReLU())
        self.expand3x3 = nn.Sequential(nn.Conv2d(6, 64, 3, padding=1), nn.ReLU())

    def forward(self, x):
        x = self.squeeze(x)
        x = torch.cat([self.expand1x1(x), self.expand3x3(x)], 1)
        return x


batch_size = 10
in_channels = 3


def get_inputs():
    return [torch.randn(batch_size, in_channels, 224, 224)]


def get_init_inputs():
    return [in_channels]
