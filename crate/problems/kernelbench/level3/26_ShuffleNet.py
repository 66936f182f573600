import torch
import torch.nn as nn
import torch.nn.functional as F


class Model(nn.Module):
    """ShuffleNet."""

    def __init__(self, num_classes: int):
        super(Model, self).__init__()
        self.features = nn.Sequential(nn.Conv2d(3, 24, 3, padding=1), nn.BatchNorm2d(24), nn.ReLU(), nn.Sequential(nn.Conv2d(24, 24, 3, stride=2, padding=1, groups=24), nn.BatchNorm2d(24), nn.ReLU6(), nn.Conv2d(24, 240, 1), nn.BatchNorm2d(240), nn.ReLU6()), nn.Sequential(nn.Conv2d(240, 240, 3, stride=1, padding=1, groups=240), nn.BatchNorm2d(240), nn.ReLU6(), nn.Conv2d(240, 240, 1), nn.BatchNorm2d(240), nn.ReLU6()), nn.Sequential(nn.Conv2d(240, 240, 3, stride=1, padding=1, groups=240), nn.BatchNorm2d(240), nn.ReLU6(), nn.Conv2d(240, 240, 1), nn.BatchNorm2d(240), nn.ReLU6()), nn.Sequential(nn.Conv2d(240, 240, 3, stride=1, padding=1, groups=240), nn.BatchNorm2d(240), nn.ReLU6(), nn.Conv2d(240, 240, 1), nn.BatchNorm2d(240), nn.ReLU6()), nn.Sequential(nn.Conv2d(240, 240, 3, stride=2, padding=1, groups=240), nn.BatchNorm2d(240), nn.ReLU6(), nn.Conv2d(240, 480, 1), nn.BatchNorm2d(480), nn.ReLU6()), nn.Sequential(nn.Conv2d(480, 480, 3, stride=1, padding=1, groups=480), nn.BatchNorm2d(480), nn.ReLU6(), nn.Conv2d(480, 480, 1), nn.BatchNorm2d(480), nn.ReLU6()), nn.Sequential(nn.Conv2d(480, 480, 3, stride=1, padding=1, groups=480), nn.BatchNorm2d(480), nn.ReLU6(), nn.Conv2d(480, 480, 1), nn.BatchNorm2d(480), nn.ReLU6()), nn.Sequential(nn.Conv2d(480, 480, 3, stride=1, padding=1, groups=480), nn.BatchNorm2d(480), nn.ReLU6(), nn.Conv2d(480, 480, 1), nn.BatchNorm2d(480), nn.ReLU6()), nn.Sequential(nn.Conv2d(480, 480, 3, stride=1, padding=1, groups=480), nn.BatchNorm2d(480), nn.ReLU6(), nn.Conv2d(480, 480, 1), nn.BatchNorm2d(480), nn.ReLU6()), nn.Sequential(nn.Conv2d(480, 480, 3, stride=1, padding=1, groups=480), nn.BatchNorm2d(480), nn.ReLU6(), nn.Conv2d(480, 480, 1), nn.BatchNorm2d(480), nn.ReLU6()), nn.Sequential(nn.Conv2d(480, 480, 3, stride=1, padding=1, groups=480), nn.BatchNorm2d(480), nn.ReLU6(), nn.Conv2d(480, 480, 1), nn.BatchNorm2d(480), nn.ReLU6()), nn.Sequential(nn.Conv2d(480, 480, 3, stride=1, padding=1, groups=480), nn.BatchNorm2d(480), nn.ReLU6(), nn.Conv2d(480, 480, 1), nn.BatchNorm2d(480), nn.ReLU6()), nn.Sequential(nn.Conv2d(480, 480, 3, stride=2, padding=1, groups=480), nn.BatchNorm2d(480), nn.ReLU6(), nn.Conv2d(480, 960, 1), nn.BatchNorm2d(960), nn.ReLU6()), nn.Sequential(nn.Conv2d(960, 960, 3, stride=1, padding=1, groups=960), nn.BatchNorm2d(960), nn.ReLU6(), nn.Conv2d(960, 960, 1), nn.BatchNorm2d(960), nn.ReLU6()), nn.Sequential(nn.Conv2d(960, 960, 3, stride=1, padding=1, groups=960), nn.BatchNorm2d(960), nn.ReLU6(), nn.Conv2d(960, 960, 1), nn.BatchNorm2d(960), nn.ReLU6()), nn.Sequential(nn.Conv2d(960, 960, 3, stride=1, padding=1, groups=960), nn.BatchNorm2d(960), nn.ReLU6(), nn.Conv2d(960, 960, 1), nn.BatchNorm2d(960), nn.ReLU6()))
        self.head = nn.Sequential(nn.AdaptiveAvgPool2d(1), nn.Flatten(), nn.Linear(960, num_classes))

    def forward(self, x):
        x = self.head(self.features(x))
        return x


batch_size = 10
num_classes = 1000


def get_inputs():
    return [torch.randn(batch_size, 3, 224, 224)]


def get_init_inputs():
    return [num_classes]
