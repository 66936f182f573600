import torch
import torch.nn as nn
import torch.nn.functional as F


class Model(nn.Module):
    """RegNet."""

    def __init__(self, num_classes: int):
        super(Model, self).__init__()
        self.features = nn.Sequential(nn.Conv2d(3, 32, 3, padding=1), nn.BatchNorm2d(32), nn.ReLU(), nn.Sequential(nn.Conv2d(32, 64, 3, stride=2, padding=1), nn.BatchNorm2d(64), nn.ReLU(), nn.Conv2d(64, 64, 3, padding=1), nn.BatchNorm2d(64)), nn.Sequential(nn.Conv2d(64, 128, 3, stride=2, padding=1), nn.BatchNorm2d(128), nn.ReLU(), nn.Conv2d(128, 128, 3, padding=1), nn.BatchNorm2d(128)), nn.Sequential(nn.Conv2d(128, 128, 3, stride=1, padding=1), nn.BatchNorm2d(128), nn.ReLU(), nn.Conv2d(128, 128, 3, padding=1), nn.BatchNorm2d(128)), nn.Sequential(nn.Conv2d(128, 128, 3, stride=1, padding=1), nn.BatchNorm2d(128), nn.ReLU(), nn.Conv2d(128, 128, 3, padding=1), nn.BatchNorm2d(128)), nn.Sequential(nn.Conv2d(128, 288, 3, stride=2, padding=1), nn.BatchNorm2d(288), nn.ReLU(), nn.Conv2d(288, 288, 3, padding=1), nn.BatchNorm2d(288)), nn.Sequential(nn.Conv2d(288, 288, 3, stride=1, padding=1), nn.BatchNorm2d(288), nn.ReLU(), nn.Conv2d(288, 288, 3, padding=1), nn.BatchNorm2d(288)), nn.Sequential(nn.Conv2d(288, 288, 3, stride=1, padding=1), nn.BatchNorm2d(288), nn.ReLU(), nn.Conv2d(288, 288, 3, padding=1), nn.BatchNorm2d(288)), nn.Sequential(nn.Conv2d(288, 288, 3, stride=1, padding=1), nn.BatchNorm2d(288), nn.ReLU(), nn.Conv2d(288, 288, 3, padding=1), nn.BatchNorm2d(288)), nn.Sequential(nn.Conv2d(288, 288, 3, stride=1, padding=1), nn.BatchNorm2d(288), nn.ReLU(), nn.Conv2d(288, 288, 3, padding=1), nn.BatchNorm2d(288)), nn.Sequential(nn.Conv2d(288, 288, 3, stride=1, padding=1), nn.BatchNorm2d(288), nn.ReLU(), nn.Conv2d(288, 288, 3, padding=1), nn.BatchNorm2d(288)), nn.Sequential(nn.Conv2d(288, 672, 3, stride=2, padding=1), nn.BatchNorm2d(672), nn.ReLU(), nn.Conv2d(672, 672, 3, padding=1), nn.BatchNorm2d(672)), nn.Sequential(nn.Conv2d(672, 672, 3, stride=1, padding=1), nn.BatchNorm2d(672), nn.ReLU(), nn.Conv2d(672, 672, 3, padding=1), nn.BatchNorm2d(672)))
        self.head = nn.Sequential(nn.AdaptiveAvgPool2d(1), nn.Flatten(), nn.Linear(672, num_classes))

    def forward(self, x):
        x = self.head(self.features(x))
        return x


batch_size = 10
num_classes = 1000


def get_inputs():
    return [torch.randn(batch_size, 3, 224, 224)]


def get_init_inputs():
    return [num_classes]
