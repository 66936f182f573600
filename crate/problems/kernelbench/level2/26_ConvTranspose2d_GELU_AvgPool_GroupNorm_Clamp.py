import torch
import torch.nn as nn
import torch.nn.functional as F


class Model(nn.Module):
    """ConvTranspose2d followed by GELU, AvgPool, GroupNorm, Clamp."""

    def __init__(self, in_channels: int, out_channels: int, kernel_size: int):
        super(Model, self).__init__()
        self.main = nn.ConvTranspose2d(in_channels, out_channels, kernel_size, stride=2, padding=1)
        self.pool = nn.AvgPool2d(2)
        self.gn = nn.GroupNorm(8, out_channels)

    def forward(self, x):
        x = self.main(x)
        x = F.gelu(x)
        x = self.pool(x)
        x = self.gn(x)
        x = torch.clamp(x, min=-1.0, max=1.0)
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
