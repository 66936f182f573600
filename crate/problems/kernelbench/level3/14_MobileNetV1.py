import torch
import torch.nn as nn
import torch.nn.functional as F


class Model(nn.Module):
    """MobileNetV1."""

    def __init__(self, num_classes: int):
        super(Model, self).__init__()
        self.features = nn.Sequential(nn.Conv2d(3, 32, 3, padding=1), nn.BatchNorm2d(32), nn.ReLU(), nn.Sequential(nn.Conv2d(32, 32, 3, stride=2, padding=1, groups=32), nn.BatchNorm2d(32), nn.ReLU6(), nn.Conv2d(32, 64, 1), nn.BatchNorm2d(64), nn.ReLU6()), nn.Sequential(nn.Conv2d(64, 64, 3, stride=2, padding=1, groups=64), nn.BatchNorm2d(64), nn.ReLU6(), nn.Conv2d(64, 128, 1), nn.BatchNorm2d(128), nn.ReLU6()), nn.Sequential(nn.Conv2d(128, 128, 3, stride=1, padding=1, groups=128), nn.BatchNorm2d(128), nn.ReLU6(), nn.Conv2d(128, 128, 1), nn.BatchNorm2d(128), nn.ReLU6()), nn.Sequential(nn.Conv2d(128, 128, 3, stride=2, padding=1, groups=128), nn.BatchNorm2d(128), nn.ReLU6(), nn.Conv2d(128, 256, 1), nn.BatchNorm2d(256), nn.ReLU6()), nn.Sequential(nn.Conv2d(256, 256, 3, stride=1, padding=1, groups=256), nn.BatchNorm2d(256), nn.ReLU6(), nn.Conv2d(256, 256, 1), nn.BatchNorm2d(256), nn.ReLU6()), nn.Sequential(nn.Conv2d(256, 256, 3, stride=2, padding=1, groups=256), nn.BatchNorm2d(256), nn.ReLU6(), nn.Conv2d(256, 512, 1), nn.BatchNorm2d(512), nn.ReLU6()), nn.Sequential(nn.Conv2d(512, 512, 3, stride=1, padding=1, groups=512), nn.BatchNorm2d(512), nn.ReLU6(), nn.Conv2d(512, 512, 1), nn.BatchNorm2d(512), nn.ReLU6()), nn.Sequential(nn.Conv2d(512, 512, 3, stride=1, padding=1, groups=512), nn.BatchNorm2d(512), nn.ReLU6(), nn.Conv2d(512, 512, 1), nn.BatchNorm2d(512), nn.ReLU6()), nn.Sequential(nn.Conv2d(512, 512, 3, stride=1, padding=1, groups=512), nn.BatchNorm2d(512), nn.ReLU6(), nn.Conv2d(512, 512, 1), nn.BatchNorm2d(512), nn.ReLU6()), nn.Sequential(nn.Conv2d(512, 512, 3, stride=1, padding=1, groups=512), nn.BatchNorm2d(512), nn.ReLU6(), nn.Conv2d(512, 512, 1), nn.BatchNorm2d(512), nn.ReLU6()), nn.Sequential(nn.Conv2d(512, 512, 3, stride=1, padding=1, groups=512), nn.BatchNorm2d(512), nn.ReLU6(), nn.Conv2d(512, 512, 1), nn.BatchNorm2d(512), nn.ReLU6()), nn.Sequential(nn.Conv2d(512, 512, 3, stride=2, padding=1, groups=512), nn.BatchNorm2d(512), nn.ReLU6(), nn.Conv2d(512, 1024, 1), nn.BatchNorm2d(1024), nn.ReLU6()), nn.Sequential(nn.Conv2d(1024, 1024, 3, stride=1, padding=1, groups=1024), nn.BatchNorm2d(1024), nn.ReLU6(), nn.Conv2d(1024, 1024, 1), nn.BatchNorm2d(1024), nn.ReLU6()))
        self.head = nn.Sequential(nn.AdaptiveAvgPool2d(1), nn.Flatten(), nn.Linear(1024, num_classes))

    def forward(self, x):
        x = self.head(self.features(x))
        return x


batch_size = 10
num_classes = 1000


def get_inputs():
    return [torch.randn(batch_size, 3, 224, 224)]


def get_init_inputs():
    return [num_classes]
