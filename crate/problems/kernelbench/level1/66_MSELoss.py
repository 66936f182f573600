import torch
import torch.nn as nn
import torch.nn.functional as F


class Model(nn.Module):
    """MSELoss averaged over the batch."""

    def __init__(self):
        super(Model, self).__init__()

    def forward(self, predictions, targets):
        return torch.mean((predictions - targets) ** 2)


batch_size = 32768
num_classes = 4096


def get_inputs():
    return [torch.randn(batch_size, num_classes), torch.randn(batch_size, num_classes)]


def get_init_inputs():
    return []
