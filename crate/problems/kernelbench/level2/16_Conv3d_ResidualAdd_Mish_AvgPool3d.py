import torch
import torch.nn as nn
import torch.nn.functional as F


class Model(nn.Module):
    """Conv3d followed by ResidualAdd, Mish, AvgPool3d."""

    def __init__(self, in_channels: int, out_channels: int, kernel_size: int):
        super(Model, self).__init__()
        self.main = nn.Conv3d(in_channels, out_channels, kernel_size)
        self.pool = nn.AvgPool3d(2)

    def forward(self, x):
        x = self.main(x)
        x = x + x.detach()
        x = F.mish(x)
        x = self.pool(x)
        return x


batch_size = 16
in_channels = 32
out_channels = 64
depth, height, width = 32, 64, 64
kernel_size = 3


def get_inputs():
    return [torch.randn(batch_size, in_channels, depth, height, width)]


def get_init_inputs():
    return [in_channels, out_channels, kernel_size]
