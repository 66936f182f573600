import torch
import torch.nn as nn
import torch.nn.functional as F


class Model(nn.Module):
    """Conv2d followed by Min, Scaling, GroupNorm."""

    def __init__(self, in_channels: int, out_channels: int, kernel_size: int, scale: float):
        super(Model, self).__init__()
        self.main = nn.Conv2d(in_channels, out_channels, kernel_size)
        self.gn = nn.GroupNorm(8, out_channels)
        self.scale = scale

    def forward(self, x):
        x = self.main(x)
        x = torch.min(x, dim=1, keepdim=True)[0]
        x = x * self.scale
        x = self.gn(x)
        return x


batch_size = 64
in_channels = 64
out_channels = 128
height = width = 256
kernel_size = 3
scale = 0.5


def get_inputs():
    return [torch.randn(batch_size, in_channels, height, width)]


def get_init_inputs():
    return [in_channels, out_channels, kernel_size, scale]
