import torch
import torch.nn as nn
import torch.nn.functional as F


class Model(nn.Module):
    """ConvTranspose3d followed by Clamp, GroupNorm, LeakyReLU."""

    def __init__(self, in_channels: int, out_channels: int, kernel_size: int):
        super(Model, self).__init__()
        self.main = nn.ConvTranspose3d(in_channels, out_channels, kernel_size, stride=2, padding=1)
        self.gn = nn.GroupNorm(8, out_channels)

    def forward(self, x):
        x = self.main(x)
        x = torch.clamp(x, min=-1.0, max=1.0)
        x = self.gn(x)
        x = F.leaky_relu(x, 0.2)
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
