import torch
import torch.nn as nn
import torch.nn.functional as F


class Model(nn.Module):
    """GRU."""

    def __init__(self, input_size: int, hidden_size: int, num_layers: int, output_size: int):
        super(Model, self).__init__()
        self.rnn = nn.GRU(input_size, hidden_size, num_layers, batch_first=True)
        self.fc = nn.Linear(hidden_size, output_size)

    def forward(self, x):
        out, _ = self.rnn(x)
        x = self.fc(out[:, -1, :])
        return x


batch_size = 10
seq_len = 512
input_size = 128
hidden_size = 256
num_layers = 6
output_size = 10


def get_inputs():
    return [torch.randn(batch_size, seq_len, input_size)]


def get_init_inputs():
    return [input_size, hidden_size, num_layers, output_size]
