import torch
import torch.nn as nn
import torch.nn.functional as F


class Model(nn.Module):
    """ConvNeXtTiny."""

    def __init__(self, num_classes: int):
        super(Model, self).__init__()
        self.features = nn.Sequential(nn.Conv2d(3, 96, 3, padding=1), nn.BatchNorm2d(96), nn.ReLU(), nn.Sequential(nn.Conv2d(96, 96, 3, stride=2, padding=1, groups=96), nn.BatchNorm2d(96), nn.ReLU6(), nn.Conv2d(96, 96, 1), nn.BatchNorm2d(96), nn.ReLU6()), nn.Sequential(nn.Conv2d(96, 96, 3, stride=1, padding=1, groups=96), nn.BatchNorm2d(96), nn.ReLU6(), nn.Conv2d(96, 96, 1), nn.BatchNorm2d(96), nn.ReLU6()), nn.Sequential(nn.Conv2d(96, 96, 3, stride=1, padding=1, groups=96), nn.BatchNorm2d(96), nn.ReLU6(), nn.Conv2d(96, 96, 1), nn.BatchNorm2d(96), nn.ReLU6()), nn.Sequential(nn.Conv2d(96, 96, 3, stride=2, padding=1, groups=96), nn.BatchNorm2d(96), nn.ReLU6(), nn.Conv2d(96, 192, 1), nn.BatchNorm2d(192), nn.ReLU6()), nn.Sequential(nn.Conv2d(192, 192, 3, stride=1, padding=1, groups=192), nn.BatchNorm2d(192), nn.ReLU6(), nn.Conv2d(192, 192, 1), nn.BatchNorm2d(192), nn.ReLU6()), nn.Sequential(nn.Conv2d(192, 192, 3, stride=1, padding=1, groups=192), nn.BatchNorm2d(192), nn.ReLU6(), nn.Conv2d(192, 192, 1), nn.BatchNorm2d(192), nn.ReLU6()), nn.Sequential(nn.Conv2d(192, 192, 3, stride=2, padding=1, groups=192), nn.BatchNorm2d(192), nn.ReLU6(), nn.Conv2d(192, 384, 1), nn.BatchNorm2d(384), nn.ReLU6()), nn.Sequential(nn.Conv2d(384, 384, 3, stride=1, padding=1, groups=384), nn.BatchNorm2d(384), nn.ReLU6(), nn.Conv2d(384, 384, 1), nn.BatchNorm2d(384), nn.ReLU6()), nn.Sequential(nn.Conv2d(384, 384, 3, stride=1, padding=1, groups=384), nn.BatchNorm2d(384), nn.ReLU6(), nn.Conv2d(384, 384, 1), nn.BatchNorm2d(384), nn.ReLU6()), nn.Sequential(nn.Conv2d(384, 384, 3, stride=1, padding=1, groups=384), nn.BatchNorm2d(384), nn.ReLU6(), nn.Conv2d(384, 384, 1), nn.BatchNorm2d(384), nn.ReLU6()), nn.Sequential(nn.Conv2d(384, 384, 3, stride=1, padding=1, groups=384), nn.BatchNorm2d(384), nn.ReLU6(), nn.Conv2d(384, 384, 1), nn.BatchNorm2d(384), nn.ReLU6()), nn.Sequential(nn.Conv2d(384, 384, 3, stride=1, padding=1, groups=384), nn.BatchNorm2d(384), nn.ReLU6(), nn.Conv2d(384, 384, 1), nn.BatchNorm2d(384), nn.ReLU6()), nn.Sequential(nn.Conv2d(384, 384, 3, stride=1, padding=1, groups=384), nn.BatchNorm2d(384), nn.ReLU6(), nn.Conv2d(384, 384, 1), nn.BatchNorm2d(384), nn.ReLU6()), nn.Sequential(nn.Conv2d(384, 384, 3, stride=1, padding=1, groups=384), nn.BatchNorm2d(384), nn.ReLU6(), nn.Conv2d(384, 384, 1), nn.BatchNorm2d(384), nn.ReLU6()), nn.Sequential(nn.Conv2d(384, 384, 3, stride=1, padding=1, groups=384), nn.BatchNorm2d(384), nn.ReLU6(), nn.Conv2d(384, 384, 1), nn.BatchNorm2d(384), nn.ReLU6()), nn.Sequential(nn.Conv2d(384, 384, 3, stride=2, padding=1, groups=384), nn.BatchNorm2d(384), nn.ReLU6(), nn.Conv2d(384, 768, 1), nn.BatchNorm2d(768), nn.ReLU6()), nn.Sequential(nn.Conv2d(768, 768, 3, stride=1, padding=1, groups=768), nn.BatchNorm2d(768), nn.ReLU6(), nn.Conv2d(768, 768, 1), nn.BatchNorm2d(768), nn.ReLU6()), nn.Sequential(nn.Conv2d(768, 768, 3, stride=1, padding=1, groups=768), nn.BatchNorm2d(768), nn.ReLU6(), nn.Conv2d(768, 768, 1), nn.BatchNorm2d(768), nn.ReLU6()))
        self.head = nn.Sequential(nn.AdaptiveAvgPool2d(1), nn.Flatten(), nn.Linear(768, num_classes))

    def forward(self, x):
        x = self.head(self.features(x))
        return x


batch_size = 10
num_classes = 1000


def get_inputs():
    return [torch.randn(batch_size, 3, 224, 224)]


def get_init_inputs():
    return [num_classes]
