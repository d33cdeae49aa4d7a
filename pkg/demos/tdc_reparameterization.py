"""
Temporal difference convolution, two ways
=========================================

The direct form loops over the 27 kernel taps and subtracts theta times the
center voxel on the two temporally adjacent slices. The reparameterized form is
one ordinary 3D convolution minus a 1x1x1 convolution whose kernel is theta
times the summed adjacent-slice weights. They agree to rounding.
"""

import torch
import torch.nn.functional as F

from autohr.tdc import TDCParams, tdc_forward, tdc_forward_reparam

torch.manual_seed(0)
x = torch.randn(2, 3, 16, 20, 20, dtype=torch.float64)
w = torch.randn(8, 3, 3, 3, 3, dtype=torch.float64)

for theta in (0.0, 0.2, 0.5, 1.0):
    p = TDCParams(w, theta)
    direct = tdc_forward(x, p)
    fast = tdc_forward_reparam(x, p)
    print(f"theta={theta}: max |direct - reparam| = {(direct - fast).abs().max():.1e}")

# theta = 0 is a plain 3D convolution
print("vs conv3d:", (tdc_forward(x, TDCParams(w, 0.0)) - F.conv3d(x, w, padding=1)).abs().max().item())

# on a constant input, theta = 1 cancels the adjacent slices wherever the
# receptive field stays clear of the zero padding
const = torch.ones(1, 3, 8, 10, 10, dtype=torch.float64)
y1 = tdc_forward(const, TDCParams(w, 1.0))
y_center = F.conv3d(const, w[:, :, 1:2], padding=(0, 1, 1))
inner = (slice(None), slice(None), slice(1, -1), slice(1, -1), slice(1, -1))
print("interior equals center-slice conv:", torch.allclose(y1[inner], y_center[inner]))
