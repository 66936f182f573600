import torch
import torch.nn as nn
import torch.nn.functional as F


class Model(nn.Module):
    """ConvTranspose2d followed by Dropout."""

    def __init__(self, in_channels: int, out_channels: int, kernel_size: int):
        super(Model, self).__init__()
        self.main = nn.ConvTranspose2d(in_channels, out_channels, kernel_size, stride=2, padding=1)
        self.dropout = nn.Dropout(p=0.0)

    def forward(self, x):
        x = self.main(x)
        x = self.dropout(x)
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
