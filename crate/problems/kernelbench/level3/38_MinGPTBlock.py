import torch
import torch.nn as nn
import torch.nn.functional as F


class Model(nn.Module):
    """MinGPTBlock."""

    def __init__(self):
        super(Model, self).__init__()
        self.attn = nn.MultiheadAttention(768, 8, batch_first=True)
        self.mlp = nn.Sequential(nn.Linear(768, 3072), nn.GELU(), nn.Linear(3072, 768))
        self.ln1 = nn.LayerNorm(768)
        self.ln2 = nn.LayerNorm(768)

    def forward(self, x):
        h = self.ln1(x)
        x = x + self.attn(h, h, h, need_weights=False)[0]
        x = x + self.mlp(self.ln2(x))
        return x


batch_size = 128
seq_len = 512


def get_inputs():
    return [torch.randn(batch_size, seq_len, 768)]


def get_init_inputs():
    return []
