import torch
import torch.nn as nn
import torch.nn.functional as F


class Model(nn.Module):
    """ConvTranspose3d followed by Scaling."""

    def __init__(self, in_channels: int, out_channels: int, kernel_size: int, scale: float):
        super(Model, self).__init__()
        self.main = nn.ConvTranspose3d(in_channels, out_channels, kernel_size, stride=2, padding=1)
        self.scale = scale

    def forward(self, x):
        x = self.main(x)
        x = x * self.scale
        return x


batch_size = 16
in_channels = 32
out_channels = 64
depth, height, width = 32, 64, 64
kernel_size = 3
scale = 0.5


def get_inputs():
    return [torch.randn(batch_size, in_channels, depth, height, width)]


def get_init_inputs():
    return [in_channels, out_channels, kernel_size, scale]
