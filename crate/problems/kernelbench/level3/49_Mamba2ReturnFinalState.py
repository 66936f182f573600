import torch
import torch.nn as nn
import torch.nn.functional as F


class Model(nn.Module):
    """Mamba2ReturnFinalState."""

    def __init__(self):
        super(Model, self).__init__()
        self.in_proj = nn.Linear(256, 1024)
        self.conv = nn.Conv1d(512, 512, 4, groups=512, padding=3)
        self.out_proj = nn.Linear(512, 256)

    def forward(self, x):
        u, z = self.in_proj(x).chunk(2, dim=-1)
        u = self.conv(u.transpose(1, 2))[..., : x.shape[1]].transpose(1, 2)
        x = torch.cumsum(F.silu(u) * torch.sigmoid(z), dim=1)[:, -1]
        return x


batch_size = 16
seq_len = 128


def get_inputs():
    return [torch.randn(batch_size, seq_len, 256)]


def get_init_inputs():
    return []
