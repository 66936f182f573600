import torch
import torch.nn as nn
import torch.nn.functional as F


class Model(nn.Module):
    """ShallowWideMLP."""

    def __init__(self, input_size: int, output_size: int):
        super(Model, self).__init__()
        self.fc = nn.Sequential(nn.Linear(input_size, 2000), nn.ReLU(), nn.Linear(2000, 2000), nn.ReLU(), nn.Linear(2000, output_size))

    def forward(self, x):
        x = self.fc(x)
        return x


batch_size = 1
input_size = 1000
output_size = 10


def get_inputs():
    return [torch.randn(batch_size, input_size)]


def get_init_inputs():
    return [input_size, output_size]
