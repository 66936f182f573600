import torch
import torch.nn as nn
import torch.nn.functional as F


class Model(nn.Module):
    """MobileNetV2."""

    def __init__(self, num_classes: int):
        super(Model, self).__init__()
        self.features = nn.Sequential(nn.Conv2d(3, 32, 3, padding=1), nn.BatchNorm2d(32), nn.ReLU(), nn.Sequential(nn.Conv2d(32, 192, 1), nn.BatchNorm2d(192), nn.ReLU6(), nn.Conv2d(192, 192, 3, stride=2, padding=1, groups=192), nn.BatchNorm2d(192), nn.ReLU6(), nn.Conv2d(192, 16, 1), nn.BatchNorm2d(16)), nn.Sequential(nn.Conv2d(16, 96, 1), nn.BatchNorm2d(96), nn.ReLU6(), nn.Conv2d(96, 96, 3, stride=2, padding=1, groups=96), nn.BatchNorm2d(96), nn.ReLU6(), nn.Conv2d(96, 24, 1), nn.BatchNorm2d(24)), nn.Sequential(nn.Conv2d(24, 144, 1), nn.BatchNorm2d(144), nn.ReLU6(), nn.Conv2d(144, 144, 3, stride=1, padding=1, groups=144), nn.BatchNorm2d(144), nn.ReLU6(), nn.Conv2d(144, 24, 1), nn.BatchNorm2d(24)), nn.Sequential(nn.Conv2d(24, 144, 1), nn.BatchNorm2d(144), nn.ReLU6(), nn.Conv2d(144, 144, 3, stride=2, padding=1, groups=144), nn.BatchNorm2d(144), nn.ReLU6(), nn.Conv2d(144, 32, 1), nn.BatchNorm2d(32)), nn.Sequential(nn.Conv2d(32, 192, 1), nn.BatchNorm2d(192), nn.ReLU6(), nn.Conv2d(192, 192, 3, stride=1, padding=1, groups=192), nn.BatchNorm2d(192), nn.ReLU6(), nn.Conv2d(192, 32, 1), nn.BatchNorm2d(32)), nn.Sequential(nn.Conv2d(32, 192, 1), nn.BatchNorm2d(192), nn.ReLU6(), nn.Conv2d(192, 192, 3, stride=1, padding=1, groups=192), nn.BatchNorm2d(192), nn.ReLU6(), nn.Conv2d(192, 32, 1), nn.BatchNorm2d(32)), nn.Sequential(nn.Conv2d(32, 192, 1), nn.BatchNorm2d(192), nn.ReLU6(), nn.Conv2d(192, 192, 3, stride=2, padding=1, groups=192), nn.BatchNorm2d(192), nn.ReLU6(), nn.Conv2d(192, 64, 1), nn.BatchNorm2d(64)), nn.Sequential(nn.Conv2d(64, 384, 1), nn.BatchNorm2d(384), nn.ReLU6(), nn.Conv2d(384, 384, 3, stride=1, padding=1, groups=384), nn.BatchNorm2d(384), nn.ReLU6(), nn.Conv2d(384, 64, 1), nn.BatchNorm2d(64)), nn.Sequential(nn.Conv2d(64, 384, 1), nn.BatchNorm2d(384), nn.ReLU6(), nn.Conv2d(384, 384, 3, stride=1, padding=1, groups=384), nn.BatchNorm2d(384), nn.ReLU6(), nn.Conv2d(384, 64, 1), nn.BatchNorm2d(64)), nn.Sequential(nn.Conv2d(64, 384, 1), nn.BatchNorm2d(384), nn.ReLU6(), nn.Conv2d(384, 384, 3, stride=1, padding=1, groups=384), nn.BatchNorm2d(384), nn.ReLU6(), nn.Conv2d(384, 64, 1), nn.BatchNorm2d(64)), nn.Sequential(nn.Conv2d(64, 384, 1), nn.BatchNorm2d(384), nn.ReLU6(), nn.Conv2d(384, 384, 3, stride=2, padding=1, groups=384), nn.BatchNorm2d(384), nn.ReLU6(), nn.Conv2d(384, 96, 1), nn.BatchNorm2d(96)), nn.Sequential(nn.Conv2d(96, 576, 1), nn.BatchNorm2d(576), nn.ReLU6(), nn.Conv2d(576, 576, 3, stride=1, padding=1, groups=576), nn.BatchNorm2d(576), nn.ReLU6(), nn.Conv2d(576, 96, 1), nn.BatchNorm2d(96)), nn.Sequential(nn.Conv2d(96, 576, 1), nn.BatchNorm2d(576), nn.ReLU6(), nn.Conv2d(576, 576, 3, stride=1, padding=1, groups=576), nn.BatchNorm2d(576), nn.ReLU6(), nn.Conv2d(576, 96, 1), nn.BatchNorm2d(96)), nn.Sequential(nn.Conv2d(96, 576, 1), nn.BatchNorm2d(576), nn.ReLU6(), nn.Conv2d(576, 576, 3, stride=2, padding=1, groups=576), nn.BatchNorm2d(576), nn.ReLU6(), nn.Conv2d(576, 160, 1), nn.BatchNorm2d(160)), nn.Sequential(nn.Conv2d(160, 960, 1), nn.BatchNorm2d(960), nn.ReLU6(), nn.Conv2d(960, 960, 3, stride=1, padding=1, groups=960), nn.BatchNorm2d(960), nn.ReLU6(), nn.Conv2d(960, 160, 1), nn.BatchNorm2d(160)), nn.Sequential(nn.Conv2d(160, 960, 1), nn.BatchNorm2d(960), nn.ReLU6(), nn.Conv2d(960, 960, 3, stride=1, padding=1, groups=960), nn.BatchNorm2d(960), nn.ReLU6(), nn.Conv2d(960, 160, 1), nn.BatchNorm2d(160)), nn.Sequential(nn.Conv2d(160, 960, 1), nn.BatchNorm2d(960), nn.ReLU6(), nn.Conv2d(960, 960, 3, stride=2, padding=1, groups=960), nn.BatchNorm2d(960), nn.ReLU6(), nn.Conv2d(960, 320, 1), nn.BatchNorm2d(320)))
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
