import torch
import torch.nn as nn
import torch.nn.functional as F


class Model(nn.Module):
    """MinGPTCausalAttention."""

    def __init__(self):
        super(Model, self).__init__()
        self.qkv = nn.Linear(768, 3 * 768)
        self.proj = nn.Linear(768, 768)

    def forward(self, x):
        q, k, v = self.qkv(x).split(768, dim=2)
        y = F.scaled_dot_product_attention(q, k, v, is_causal=True)
        x = self.proj(y)
        return x


batch_size = 128
seq_len = 512


def get_inputs():
    return [torch.randn(batch_size, seq_len, 768)]


def get_init_inputs():
    return []
