import torch
import torch.nn as nn
import torch.nn.functional as F


class Model(nn.Module):
    """TransformerEncoderLayer."""

    def __init__(self):
        super(Model, self).__init__()
        self.layer = nn.TransformerEncoderLayer(512, 8, 2048, batch_first=True)

    def forward(self, x):
        x = self.layer(x)
        return x


batch_size = 32
seq_len = 512


def get_inputs():
    return [torch.randn(batch_size, seq_len, 512)]


def get_init_inputs():
    return []
