import torch
import torch.nn as nn
import torch.nn.functional as F


class Model(nn.Module):
    """MaxPool3d pooling."""

    def __init__(self):
        super(Model, self).__init__()
        self.pool = nn.MaxPool3d(kernel_size=3, stride=2, padding=1)

    def forward(self, x):
        return self.pool(x)





def get_inputs():
    return [torch.randn(16, 32, 128, 128, 128)]


def get_init_inputs():
    return []
