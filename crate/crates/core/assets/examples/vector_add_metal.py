import torch
import torch.nn as nn

metal_source = r"""
#include <metal_stdlib>
using namespace metal;

kernel void vector_add_kernel(device const float* a [[buffer(0)]],
                              device const float* b [[buffer(1)]],
                              device float* out     [[buffer(2)]],
                              uint idx [[thread_position_in_grid]]) {
    out[idx] = a[idx] + b[idx];
}
"""

shader_lib = torch.mps.compile_shader(metal_source)


class NewModel(nn.Module):
    def __init__(self) -> None:
        super().__init__()
        self.lib = shader_lib

    def forward(self, a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
        assert a.device.type == "mps" and b.device.type == "mps", "inputs must be MPS tensors"
        a_c = a.contiguous()
        b_c = b.contiguous()
        out = torch.empty_like(a_c)
        self.lib.vector_add_kernel(a_c, b_c, out, threads=a_c.numel())
        return out
