import torch
import torch.nn as nn
import torch.nn.functional as F


class Model(nn.Module):
    """GoogleNetInceptionModule."""

    def __init__(self, in_channels: int):
        super(Model, self).__init__()
        self.b1 = nn.Conv2d(in_channels, 64, 1)
        self.b3 = nn.Sequential(nn.Conv2d(in_channels, 96, 1), nn.Conv2d(96, 128, 3, padding=1))
        self.b5 = nn.Sequential(nn.Conv2d(in_channels, 16, 1), nn.Conv2d(16, 32, 5, padding=2))
        self.bp = nn.Sequential(nn.MaxPool2d(3, 1, padding=1), nn.Conv2d(in_channels, 32, 1))

    def forward(self, x):
        x = torch.cat([self.b1(x), self.b3(x), self.b5(x), self.bp(x)], 1)
        return x


batch_size = 10
in_channels = 480


def get_inputs():
    return [torch.randn(batch_size, in_channels, 224, 224)]


def get_init_inputs():
    return [in_channels]
