import torch
import torch.nn as nn
import torch.nn.functional as F


class Model(nn.Module):
    """EfficientNetB1."""

    def __init__(self, num_classes: int):
        super(Model, self).__init__()
        self.features = nn.Sequential(nn.Conv2d(3, 32, 3, padding=1), nn.BatchNorm2d(32), nn.ReLU(), nn.Sequential(nn.Conv2d(32, 192, 1), nn.BatchNorm2d(192), nn.ReLU6(), nn.Conv2d(192, 192, 3, stride=2, padding=1, groups=192), nn.BatchNorm2d(192), nn.ReLU6(), nn.Conv2d(192, 16, 1), nn.BatchNorm2d(16)), nn.Sequential(nn.Conv2d(16, 96, 1), nn.BatchNorm2d(96), nn.ReLU6(), nn.Conv2d(96, 96, 3, stride=1, padding=1, groups=96), nn.BatchNorm2d(96), nn.ReLU6(), nn.Conv2d(96, 16, 1), nn.BatchNorm2d(16)), nn.Sequential(nn.Conv2d(16, 96, 1), nn.BatchNorm2d(96), nn.ReLU6(), nn.Conv2d(96, 96, 3, stride=2, padding=1, groups=96), nn.BatchNorm2d(96), nn.ReLU6(), nn.Conv2d(96, 24, 1), nn.BatchNorm2d(24)), nn.Sequential(nn.Conv2d(24, 144, 1), nn.BatchNorm2d(144), nn.ReLU6(), nn.Conv2d(144, 144, 3, stride=1, padding=1, groups=144), nn.BatchNorm2d(144), nn.ReLU6(), nn.Conv2d(144, 24, 1), nn.BatchNorm2d(24)), nn.Sequential(nn.Conv2d(24, 144, 1), nn.BatchNorm2d(144), nn.ReLU6(), nn.Conv2d(144, 144, 3, stride=1, padding=1, groups=144), nn.BatchNorm2d(144), nn.ReLU6(), nn.Conv2d(144, 24, 1), nn.BatchNorm2d(24)), nn.Sequential(nn.Conv2d(24, 144, 1), nn.BatchNorm2d(144), nn.ReLU6(), nn.Conv2d(144, 144, 3, stride=2, padding=1, groups=144), nn.BatchNorm2d(144), nn.ReLU6(), nn.Conv2d(144, 40, 1), nn.BatchNorm2d(40)), nn.Sequential(nn.Conv2d(40, 240, 1), nn.BatchNorm2d(240), nn.ReLU6(), nn.Conv2d(240, 240, 3, stride=1, padding=1, groups=240), nn.BatchNorm2d(240), nn.ReLU6(), nn.Conv2d(240, 40, 1), nn.BatchNorm2d(40)), nn.Sequential(nn.Conv2d(40, 240, 1), nn.BatchNorm2d(240), nn.ReLU6(), nn.Conv2d(240, 240, 3, stride=1, padding=1, groups=240), nn.BatchNorm2d(240), nn.ReLU6(), nn.Conv2d(240, 40, 1), nn.BatchNorm2d(40)), nn.Sequential(nn.Conv2d(40, 240, 1), nn.BatchNorm2d(240), nn.ReLU6(), nn.Conv2d(240, 240, 3, stride=2, padding=1, groups=240), nn.BatchNorm2d(240), nn.ReLU6(), nn.Conv2d(240, 80, 1), nn.BatchNorm2d(80)), nn.Sequential(nn.Conv2d(80, 480, 1), nn.BatchNorm2d(480), nn.ReLU6(), nn.Conv2d(480, 480, 3, stride=1, padding=1, groups=480), nn.BatchNorm2d(480), nn.ReLU6(), nn.Conv2d(480, 80, 1), nn.BatchNorm2d(80)), nn.Sequential(nn.Conv2d(80, 480, 1), nn.BatchNorm2d(480), nn.ReLU6(), nn.Conv2d(480, 480, 3, stride=1, padding=1, groups=480), nn.BatchNorm2d(480), nn.ReLU6(), nn.Conv2d(480, 80, 1), nn.BatchNorm2d(80)), nn.Sequential(nn.Conv2d(80, 480, 1), nn.BatchNorm2d(480), nn.ReLU6(), nn.Conv2d(480, 480, 3, stride=1, padding=1, groups=480), nn.BatchNorm2d(480), nn.ReLU6(), nn.Conv2d(480, 80, 1), nn.BatchNorm2d(80)), nn.Sequential(nn.Conv2d(80, 480, 1), nn.BatchNorm2d(480), nn.ReLU6(), nn.Conv2d(480, 480, 3, stride=2, padding=1, groups=480), nn.BatchNorm2d(480), nn.ReLU6(), nn.Conv2d(480, 112, 1), nn.BatchNorm2d(112)), nn.Sequential(nn.Conv2d(112, 672, 1), nn.BatchNorm2d(672), nn.ReLU6(), nn.Conv2d(672, 672, 3, stride=1, padding=1, groups=672), nn.BatchNorm2d(672), nn.ReLU6(), nn.Conv2d(672, 112, 1), nn.BatchNorm2d(112)), nn.Sequential(nn.Conv2d(112, 672, 1), nn.BatchNorm2d(672), nn.ReLU6(), nn.Conv2d(672, 672, 3, stride=1, padding=1, groups=672), nn.BatchNorm2d(672), nn.ReLU6(), nn.Conv2d(672, 112, 1), nn.BatchNorm2d(112)), nn.Sequential(nn.Conv2d(112, 672, 1), nn.BatchNorm2d(672), nn.ReLU6(), nn.Conv2d(672, 672, 3, stride=1, padding=1, groups=672), nn.BatchNorm2d(672), nn.ReLU6(), nn.Conv2d(672, 112, 1), nn.BatchNorm2d(112)), nn.Sequential(nn.Conv2d(112, 672, 1), nn.BatchNorm2d(672), nn.ReLU6(), nn.Conv2d(672, 672, 3, stride=2, padding=1, groups=672), nn.BatchNorm2d(672), nn.ReLU6(), nn.Conv2d(672, 192, 1), nn.BatchNorm2d(192)), nn.Sequential(nn.Conv2d(192, 1152, 1), nn.BatchNorm2d(1152), nn.ReLU6(), nn.Conv2d(1152, 1152, 3, stride=1, padding=1, groups=1152), nn.BatchNorm2d(1152), nn.ReLU6(), nn.Conv2d(1152, 192, 1), nn.BatchNorm2d(192)), nn.Sequential(nn.Conv2d(192, 1152, 1), nn.BatchNorm2d(1152), nn.ReLU6(), nn.Conv2d(1152, 1152, 3, stride=1, padding=1, groups=1152), nn.BatchNorm2d(1152), nn.ReLU6(), nn.Conv2d(1152, 192, 1), nn.BatchNorm2d(192)), nn.Sequential(nn.Conv2d(192, 1152, 1), nn.BatchNorm2d(1152), nn.ReLU6(), nn.Conv2d(1152, 1152, 3, stride=1, padding=1, groups=1152), nn.BatchNorm2d(1152), nn.ReLU6(), nn.Conv2d(1152, 192, 1), nn.BatchNorm2d(192)), nn.Sequential(nn.Conv2d(192, 1152, 1), nn.BatchNorm2d(1152), nn.ReLU6(), nn.Conv2d(1152, 1152, 3, stride=1, padding=1, groups=1152), nn.BatchNorm2d(1152), nn.ReLU6(), nn.Conv2d(1152, 192, 1), nn.BatchNorm2d(192)), nn.Sequential(nn.Conv2d(192, 1152, 1), nn.BatchNorm2d(1152), nn.ReLU6(), nn.Conv2d(1152, 1152, 3, stride=2, padding=1, groups=1152), nn.BatchNorm2d(1152), nn.ReLU6(), nn.Conv2d(1152, 320, 1), nn.BatchNorm2d(320)), nn.Sequential(nn.Conv2d(320, 1920, 1), nn.BatchNorm2d(1920), nn.ReLU6(), nn.Conv2d(1920, 1920, 3, stride=1, padding=1, groups=1920), nn.BatchNorm2d(1920), nn.ReLU6(), nn.Conv2d(1920, 320, 1), nn.BatchNorm2d(320)))
        self.head = nn.Sequential(nn.AdaptiveAvgPool2d(1), nn.Flatten(), nn.Linear(320, num_classes))

    def forward(self, x):
        x = self.head(self.features(x))
        return x


batch_size = 10
num_classes = 1000


def get_inputs():
    return [torch.randn(batch_size, 3, 224, 224)]


def get_init_inputs():
    return [num_classes]
