import torch
import torch.nn as nn
import torch.nn.functional as F


class Model(nn.Module):
    """EfficientNetB2."""

    def __init__(self, num_classes: int):
        super(Model, self).__init__()
        self.features = nn.Sequential(nn.Conv2d(3, 32, 3, padding=1), nn.BatchNorm2d(32), nn.ReLU(), nn.Sequential(nn.Conv2d(32, 192, 1), nn.BatchNorm2d(192), nn.ReLU6(), nn.Conv2d(192, 192, 3, stride=2, padding=1, groups=192), nn.BatchNorm2d(192), nn.ReLU6(), nn.Conv2d(192, 16, 1), nn.BatchNorm2d(16)), nn.Sequential(nn.Conv2d(16, 96, 1), nn.BatchNorm2d(96), nn.ReLU6(), nn.Conv2d(96, 96, 3, stride=1, padding=1, groups=96), nn.BatchNorm2d(96), nn.ReLU6(), nn.Conv2d(96, 16, 1), nn.BatchNorm2d(16)), nn.Sequential(nn.Conv2d(16, 96, 1), nn.BatchNorm2d(96), nn.ReLU6(), nn.Conv2d(96, 96, 3, stride=2, padding=1, groups=96), nn.BatchNorm2d(96), nn.ReLU6(), nn.Conv2d(96, 24, 1), nn.BatchNorm2d(24)), nn.Sequential(nn.Conv2d(24, 144, 1), nn.BatchNorm2d(144), nn.ReLU6(), nn.Conv2d(144, 144, 3, stride=1, padding=1, groups=144), nn.BatchNorm2d(144), nn.ReLU6(), nn.Conv2d(144, 24, 1), nn.BatchNorm2d(24)), nn.Sequential(nn.Conv2d(24, 144, 1), nn.BatchNorm2d(144), nn.ReLU6(), nn.Conv2d(144, 144, 3, stride=1, padding=1, groups=144), nn.BatchNorm2d(144), nn.ReLU6(), nn.Conv2d(144, 24, 1), nn.BatchNorm2d(24)), nn.Sequential(nn.Conv2d(24, 144, 1), nn.BatchNorm2d(144), nn.ReLU6(), nn.Conv2d(144, 144, 3, stride=2, padding=1, groups=144), nn.BatchNorm2d(144), nn.ReLU6(), nn.Conv2d(144, 48, 1), nn.BatchNorm2d(48)), nn.Sequential(nn.Conv2d(48, 288, 1), nn.BatchNorm2d(288), nn.ReLU6(), nn.Conv2d(288, 288, 3, stride=1, padding=1, groups=288), nn.BatchNorm2d(288), nn.ReLU6(), nn.Conv2d(288, 48, 1), nn.BatchNorm2d(48)), nn.Sequential(nn.Conv2d(48, 288, 1), nn.BatchNorm2d(288), nn.ReLU6(), nn.Conv2d(288, 288, 3, stride=1, padding=1, groups=288), nn.BatchNorm2d(288), nn.ReLU6(), nn.Conv2d(288, 48, 1), nn.BatchNorm2d(48)), nn.Sequential(nn.Conv2d(48, 288, 1), nn.BatchNorm2d(288), nn.ReLU6(), nn.Conv2d(288, 288, 3, stride=2, padding=1, groups=288), nn.BatchNorm2d(288), nn.ReLU6(), nn.Conv2d(288, 88, 1), nn.BatchNorm2d(88)), nn.Sequential(nn.Conv2d(88, 528, 1), nn.BatchNorm2d(528), nn.ReLU6(), nn.Conv2d(528, 528, 3, stride=1, padding=1, groups=528), nn.BatchNorm2d(528), nn.ReLU6(), nn.Conv2d(528, 88, 1), nn.BatchNorm2d(88)), nn.Sequential(nn.Conv2d(88, 528, 1), nn.BatchNorm2d(528), nn.ReLU6(), nn.Conv2d(528, 528, 3, stride=1, padding=1, groups=528), nn.BatchNorm2d(528), nn.ReLU6(), nn.Conv2d(528, 88, 1), nn.BatchNorm2d(88)), nn.Sequential(nn.Conv2d(88, 528, 1), nn.BatchNorm2d(528), nn.ReLU6(), nn.Conv2d(528, 528, 3, stride=1, padding=1, groups=528), nn.BatchNorm2d(528), nn.ReLU6(), nn.Conv2d(528, 88, 1), nn.BatchNorm2d(88)), nn.Sequential(nn.Conv2d(88, 528, 1), nn.BatchNorm2d(528), nn.ReLU6(), nn.Conv2d(528, 528, 3, stride=2, padding=1, groups=528), nn.BatchNorm2d(528), nn.ReLU6(), nn.Conv2d(528, 120, 1), nn.BatchNorm2d(120)), nn.Sequential(nn.Conv2d(120, 720, 1), nn.BatchNorm2d(720), nn.ReLU6(), nn.Conv2d(720, 720, 3, stride=1, padding=1, groups=720), nn.BatchNorm2d(720), nn.ReLU6(), nn.Conv2d(720, 120, 1), nn.BatchNorm2d(120)), nn.Sequential(nn.Conv2d(120, 720, 1), nn.BatchNorm2d(720), nn.ReLU6(), nn.Conv2d(720, 720, 3, stride=1, padding=1, groups=720), nn.BatchNorm2d(720), nn.ReLU6(), nn.Conv2d(720, 120, 1), nn.BatchNorm2d(120)), nn.Sequential(nn.Conv2d(120, 720, 1), nn.BatchNorm2d(720), nn.ReLU6(), nn.Conv2d(720, 720, 3, stride=1, padding=1, groups=720), nn.BatchNorm2d(720), nn.ReLU6(), nn.Conv2d(720, 120, 1), nn.BatchNorm2d(120)), nn.Sequential(nn.Conv2d(120, 720, 1), nn.BatchNorm2d(720), nn.ReLU6(), nn.Conv2d(720, 720, 3, stride=2, padding=1, groups=720), nn.BatchNorm2d(720), nn.ReLU6(), nn.Conv2d(720, 208, 1), nn.BatchNorm2d(208)), nn.Sequential(nn.Conv2d(208, 1248, 1), nn.BatchNorm2d(1248), nn.ReLU6(), nn.Conv2d(1248, 1248, 3, stride=1, padding=1, groups=1248), nn.BatchNorm2d(1248), nn.ReLU6(), nn.Conv2d(1248, 208, 1), nn.BatchNorm2d(208)), nn.Sequential(nn.Conv2d(208, 1248, 1), nn.BatchNorm2d(1248), nn.ReLU6(), nn.Conv2d(1248, 1248, 3, stride=1, padding=1, groups=1248), nn.BatchNorm2d(1248), nn.ReLU6(), nn.Conv2d(1248, 208, 1), nn.BatchNorm2d(208)), nn.Sequential(nn.Conv2d(208, 1248, 1), nn.BatchNorm2d(1248), nn.ReLU6(), nn.Conv2d(1248, 1248, 3, stride=1, padding=1, groups=1248), nn.BatchNorm2d(1248), nn.ReLU6(), nn.Conv2d(1248, 208, 1), nn.BatchNorm2d(208)), nn.Sequential(nn.Conv2d(208, 1248, 1), nn.BatchNorm2d(1248), nn.ReLU6(), nn.Conv2d(1248, 1248, 3, stride=1, padding=1, groups=1248), nn.BatchNorm2d(1248), nn.ReLU6(), nn.Conv2d(1248, 208, 1), nn.BatchNorm2d(208)), nn.Sequential(nn.Conv2d(208, 1248, 1), nn.BatchNorm2d(1248), nn.ReLU6(), nn.Conv2d(1248, 1248, 3, stride=2, padding=1, groups=1248), nn.BatchNorm2d(1248), nn.ReLU6(), nn.Conv2d(1248, 352, 1), nn.BatchNorm2d(352)), nn.Sequential(nn.Conv2d(352, 2112, 1), nn.BatchNorm2d(2112), nn.ReLU6(), nn.Conv2d(2112, 2112, 3, stride=1, padding=1, groups=2112), nn.BatchNorm2d(2112), nn.ReLU6(), nn.Conv2d(2112, 352, 1), nn.BatchNorm2d(352)))
        self.head = nn.Sequential(nn.AdaptiveAvgPool2d(1), nn.Flatten(), nn.Linear(352, num_classes))

    def forward(self, x):
        x = self.head(self.features(x))
        return x


batch_size = 10
num_classes = 1000


def get_inputs():
    return [torch.randn(batch_size, 3, 224, 224)]


def get_init_inputs():
    return [num_classes]
