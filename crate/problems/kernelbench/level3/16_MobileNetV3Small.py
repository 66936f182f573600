import torch
import torch.nn as nn
import torch.nn.functional as F


class Model(nn.Module):
    """MobileNetV3Small."""

    def __init__(self, num_classes: int):
        super(Model, self).__init__()
        self.features = nn.Sequential(nn.Conv2d(3, 16, 3, padding=1), nn.BatchNorm2d(16), nn.ReLU(), nn.Sequential(nn.Conv2d(16, 96, 1), nn.BatchNorm2d(96), nn.ReLU6(), nn.Conv2d(96, 96, 3, stride=2, padding=1, groups=96), nn.BatchNorm2d(96), nn.ReLU6(), nn.Conv2d(96, 16, 1), nn.BatchNorm2d(16)), nn.Sequential(nn.Conv2d(16, 96, 1), nn.BatchNorm2d(96), nn.ReLU6(), nn.Conv2d(96, 96, 3, stride=2, padding=1, groups=96), nn.BatchNorm2d(96), nn.ReLU6(), nn.Conv2d(96, 24, 1), nn.BatchNorm2d(24)), nn.Sequential(nn.Conv2d(24, 144, 1), nn.BatchNorm2d(144), nn.ReLU6(), nn.Conv2d(144, 144, 3, stride=1, padding=1, groups=144), nn.BatchNorm2d(144), nn.ReLU6(), nn.Conv2d(144, 24, 1), nn.BatchNorm2d(24)), nn.Sequential(nn.Conv2d(24, 144, 1), nn.BatchNorm2d(144), nn.ReLU6(), nn.Conv2d(144, 144, 3, stride=2, padding=1, groups=144), nn.BatchNorm2d(144), nn.ReLU6(), nn.Conv2d(144, 40, 1), nn.BatchNorm2d(40)), nn.Sequential(nn.Conv2d(40, 240, 1), nn.BatchNorm2d(240), nn.ReLU6(), nn.Conv2d(240, 240, 3, stride=1, padding=1, groups=240), nn.BatchNorm2d(240), nn.ReLU6(), nn.Conv2d(240, 40, 1), nn.BatchNorm2d(40)), nn.Sequential(nn.Conv2d(40, 240, 1), nn.BatchNorm2d(240), nn.ReLU6(), nn.Conv2d(240, 240, 3, stride=1, padding=1, groups=240), nn.BatchNorm2d(240), nn.ReLU6(), nn.Conv2d(240, 40, 1), nn.BatchNorm2d(40)), nn.Sequential(nn.Conv2d(40, 240, 1), nn.BatchNorm2d(240), nn.ReLU6(), nn.Conv2d(240, 240, 3, stride=2, padding=1, groups=240), nn.BatchNorm2d(240), nn.ReLU6(), nn.Conv2d(240, 48, 1), nn.BatchNorm2d(48)), nn.Sequential(nn.Conv2d(48, 288, 1), nn.BatchNorm2d(288), nn.ReLU6(), nn.Conv2d(288, 288, 3, stride=1, padding=1, groups=288), nn.BatchNorm2d(288), nn.ReLU6(), nn.Conv2d(288, 48, 1), nn.BatchNorm2d(48)), nn.Sequential(nn.Conv2d(48, 288, 1), nn.BatchNorm2d(288), nn.ReLU6(), nn.Conv2d(288, 288, 3, stride=2, padding=1, groups=288), nn.BatchNorm2d(288), nn.ReLU6(), nn.Conv2d(288, 96, 1), nn.BatchNorm2d(96)), nn.Sequential(nn.Conv2d(96, 576, 1), nn.BatchNorm2d(576), nn.ReLU6(), nn.Conv2d(576, 576, 3, stride=1, padding=1, groups=576), nn.BatchNorm2d(576), nn.ReLU6(), nn.Conv2d(576, 96, 1), nn.BatchNorm2d(96)), nn.Sequential(nn.Conv2d(96, 576, 1), nn.BatchNorm2d(576), nn.ReLU6(), nn.Conv2d(576, 576, 3, stride=1, padding=1, groups=576), nn.BatchNorm2d(576), nn.ReLU6(), nn.Conv2d(576, 96, 1), nn.BatchNorm2d(96)))
        self.head = nn.Sequential(nn.AdaptiveAvgPool2d(1), nn.Flatten(), nn.Linear(96, num_classes))

    def forward(self, x):
        x = self.head(self.features(x))
        return x


batch_size = 10
num_classes = 1000


def get_inputs():
    return [torch.randn(batch_size, 3, 224, 224)]


def get_init_inputs():
    return [num_classes]
