import torch
import torch.nn as nn
import torch.nn.functional as F


class Model(nn.Module):
    """Conv2d followed by AvgPool, GlobalAvgPool, Subtract."""

    def __init__(self, in_channels: int, out_channels: int, kernel_size: int):
        super(Model, self).__init__()
        self.main = nn.Conv2d(in_channels, out_channels, kernel_size)
        self.pool = nn.AvgPool2d(2)

    def forward(self, x):
        x = self.main(x)
        x = self.pool(x)
        x = torch.mean(x, dim=(2, 3), keepdim=True)
        x = x - 0.5
        return x


batch_size = 64
in_channels = 64
out_channels = 128
height = width = 256
kernel_size = 3


def get_inputs():
    return [torch.randn(batch_size, in_channels, height, width)]


def get_init_inputs():
    return [in_channels, out_channels, kernel_size]
