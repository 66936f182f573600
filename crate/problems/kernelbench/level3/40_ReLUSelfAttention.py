import torch
import torch.nn as nn
import torch.nn.functional as F


class Model(nn.Module):
    """ReLUSelfAttention."""

    def __init__(self):
        super(Model, self).__init__()
        self.qkv = nn.Linear(768, 3 * 768)
        self.proj = nn.Linear(768, 768)

    def forward(self, x):
        q, k, v = self.qkv(x).split(768, dim=2)
        att = torch.relu(q @ k.transpose(-2, -1) / 768 ** 0.5)
        x = self.proj(att @ v)
        return x


batch_size = 16
seq_len = 1024


def get_inputs():
    return [torch.randn(batch_size, seq_len, 768)]


def get_init_inputs():
    return []
