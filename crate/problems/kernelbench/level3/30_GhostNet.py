import torch
import torch.nn as nn
import torch.nn.functional as F


class Model(nn.Module):
    """GhostNet."""

    def __init__(self, num_classes: int):
        super(Model, self).__init__()
        self.features = nn.Sequential(nn.Conv2d(3, 16, 3, padding=1), nn.BatchNorm2d(16), nn.ReLU(), nn.Sequential(nn.Conv2d(16, 16, 3, stride=2, padding=1, groups=16), nn.BatchNorm2d(16), nn.ReLU6(), nn.Conv2d(16, 16, 1), nn.BatchNorm2d(16), nn.ReLU6()), nn.Sequential(nn.Conv2d(16, 16, 3, stride=2, padding=1, groups=16), nn.BatchNorm2d(16), nn.ReLU6(), nn.Conv2d(16, 24, 1), nn.BatchNorm2d(24), nn.ReLU6()), nn.Sequential(nn.Conv2d(24, 24, 3, stride=1, padding=1, groups=24), nn.BatchNorm2d(24), nn.ReLU6(), nn.Conv2d(24, 24, 1), nn.BatchNorm2d(24), nn.ReLU6()), nn.Sequential(nn.Conv2d(24, 24, 3, stride=2, padding=1, groups=24), nn.BatchNorm2d(24), nn.ReLU6(), nn.Conv2d(24, 40, 1), nn.BatchNorm2d(40), nn.ReLU6()), nn.Sequential(nn.Conv2d(40, 40, 3, stride=1, padding=1, groups=40), nn.BatchNorm2d(40), nn.ReLU6(), nn.Conv2d(40, 40, 1), nn.BatchNorm2d(40), nn.ReLU6()), nn.Sequential(nn.Conv2d(40, 40, 3, stride=2, padding=1, groups=40), nn.BatchNorm2d(40), nn.ReLU6(), nn.Conv2d(40, 80, 1), nn.BatchNorm2d(80), nn.ReLU6()), nn.Sequential(nn.Conv2d(80, 80, 3, stride=1, padding=1, groups=80), nn.BatchNorm2d(80), nn.ReLU6(), nn.Conv2d(80, 80, 1), nn.BatchNorm2d(80), nn.ReLU6()), nn.Sequential(nn.Conv2d(80, 80, 3, stride=1, padding=1, groups=80), nn.BatchNorm2d(80), nn.ReLU6(), nn.Conv2d(80, 80, 1), nn.BatchNorm2d(80), nn.ReLU6()), nn.Sequential(nn.Conv2d(80, 80, 3, stride=1, padding=1, groups=80), nn.BatchNorm2d(80), nn.ReLU6(), nn.Conv2d(80, 80, 1), nn.BatchNorm2d(80), nn.ReLU6()), nn.Sequential(nn.Conv2d(80, 80, 3, stride=2, padding=1, groups=80), nn.BatchNorm2d(80), nn.ReLU6(), nn.Conv2d(80, 112, 1), nn.BatchNorm2d(112), nn.ReLU6()), nn.Sequential(nn.Conv2d(112, 112, 3, stride=1, padding=1, groups=112), nn.BatchNorm2d(112), nn.ReLU6(), nn.Conv2d(112, 112, 1), nn.BatchNorm2d(112), nn.ReLU6()), nn.Sequential(nn.Conv2d(112, 112, 3, stride=2, padding=1, groups=112), nn.BatchNorm2d(112), nn.ReLU6(), nn.Conv2d(112, 160, 1), nn.BatchNorm2d(160), nn.ReLU6()), nn.Sequential(nn.Conv2d(160, 160, 3, stride=1, padding=1, groups=160), nn.BatchNorm2d(160), nn.ReLU6(), nn.Conv2d(160, 160, 1), nn.BatchNorm2d(160), nn.ReLU6()), nn.Sequential(nn.Conv2d(160, 160, 3, stride=1, padding=1, groups=160), nn.BatchNorm2d(160), nn.ReLU6(), nn.Conv2d(160, 160, 1), nn.BatchNorm2d(160), nn.ReLU6()), nn.Sequential(nn.Conv2d(160, 160, 3, stride=1, padding=1, groups=160), nn.BatchNorm2d(160), nn.ReLU6(), nn.Conv2d(160, 160, 1), nn.BatchNorm2d(160), nn.ReLU6()))
        self.head = nn.Sequential(nn.AdaptiveAvgPool2d(1), nn.Flatten(), nn.Linear(160, num_classes))

    def forward(self, x):
        x = self.head(self.features(x))
        return x


batch_size = 10
num_classes = 1000


def get_inputs():
    return [torch.randn(batch_size, 3, 224, 224)]


def get_init_inputs():
    return [num_classes]
