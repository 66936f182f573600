import torch
import torch.nn as nn
import torch.nn.functional as F


class Model(nn.Module):
    """MaxPool2d pooling."""

    def __init__(self):
        super(Model, self).__init__()
        self.pool = nn.MaxPool2d(kernel_size=4, stride=2, padding=1)

    def forward(self, x):
        return self.pool(x)





def get_inputs():
    return [torch.randn(32, 64, 512, 512)]


def get_init_inputs():
    return []
