import torch
import torch.nn as nn
import torch.nn.functional as F


class Model(nn.Module):
    """UNetSoftmax."""

    def __init__(self):
        super(Model, self).__init__()
        self.down = nn.Sequential(nn.Conv2d(8, 64, 3, padding=1), nn.BatchNorm2d(64), nn.Softmax(dim=-1), nn.MaxPool2d(2))
        self.up = nn.Sequential(nn.ConvTranspose2d(64, 32, 2, stride=2), nn.Conv2d(32, 4, 1))

    def forward(self, x):
        x = self.up(self.down(x))
        return x


batch_size = 8


def get_inputs():
    return [torch.randn(batch_size, 8, 64, 512)]


def get_init_inputs():
    return []
