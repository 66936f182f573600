import torch
import torch.nn as nn
import torch.nn.functional as F


class Model(nn.Module):
    """MaxPool1d pooling."""

    def __init__(self):
        super(Model, self).__init__()
        self.pool = nn.MaxPool1d(kernel_size=4, stride=2, padding=2)

    def forward(self, x):
        return self.pool(x)





def get_inputs():
    return [torch.randn(64, 192, 65536)]


def get_init_inputs():
    return []
