"""Densely connected encoder-decoder for seismic velocity inversion.

Input is a stack of 20 shot gathers, [B, 20, 1000, 34]; output a velocity
field in normalized units, [B, 1, 100, 100], through a final 1x1 convolution
and sigmoid.

Four 1D convolution layers first compress the time axis to the receiver
count (1000 -> 500 -> 250 -> 84 -> 34). The encoder then alternates dense
blocks with strided transition convolutions through feature sizes 34, 18, 9
and 6; the decoder scales back up through 9, 18, 34, 51 and 100 with
nearest-neighbor resizing followed by convolution. The concatenated dense
block outputs at 18x18 and 34x34 cross over to the decoder stages of the
same size.

Every dense block has three conv+BN+ReLU layers of 64 feature maps; the
third layer sees the concatenation of the first two, and the block emits
the concatenation of all three (192 channels).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import torch
import torch.nn as nn
import torch.nn.functional as F


@dataclass(frozen=True)
class DenseBlockConfig:
    channels: int = 64            # c1 = c2 = c3
    kernel: int = 3

    @property
    def out_channels(self) -> int:
        return 3 * self.channels


@dataclass(frozen=True)
class NetConfig:
    in_shots: int = 20
    n_t: int = 1000
    n_receivers: int = 34
    out_size: int = 100
    # (kernel, stride, padding, out_channels) for the 1D time reduction
    time_reduction: tuple = (
        (7, 2, 3, 32),
        (5, 2, 2, 64),
        (5, 3, 2, 64),
        (18, 2, 0, 64),
    )
    encoder_blocks: tuple = ((34, 3), (18, 2), (9, 1), (6, 1))   # (size, n dense blocks)
    decoder_blocks: tuple = ((9, 1), (18, 1), (34, 2), (51, 2), (100, 1))
    decoder_channels: tuple = (128, 96, 64, 64, 48)              # conv width after each resize
    transition_channels: int = 128
    skip_sizes: tuple = (18, 34)
    dense: DenseBlockConfig = field(default_factory=DenseBlockConfig)


class Con2D(nn.Sequential):
    """conv2d + batch norm + ReLU."""

    def __init__(self, cin, cout, kernel=3, stride=1, padding=1):
        super().__init__(
            nn.Conv2d(cin, cout, kernel, stride, padding),
            nn.BatchNorm2d(cout),
            nn.ReLU(inplace=True),
        )


class DenseBlock(nn.Module):
    """Three Con2D layers with dense connectivity.

    x1 = L1(x0); x2 = L2(x1); x3 = L3(concat(x1, x2));
    output concat(x1, x2, x3).
    """

    def __init__(self, cin: int, cfg: DenseBlockConfig = DenseBlockConfig()):
        super().__init__()
        c, k = cfg.channels, cfg.kernel
        p = k // 2
        self.l1 = Con2D(cin, c, k, 1, p)
        self.l2 = Con2D(c, c, k, 1, p)
        self.l3 = Con2D(2 * c, c, k, 1, p)

    def forward(self, x0):
        x1 = self.l1(x0)
        x2 = self.l2(x1)
        x3 = self.l3(torch.cat([x1, x2], dim=1))
        return torch.cat([x1, x2, x3], dim=1)


class _Resize(nn.Module):
    def __init__(self, size: int):
        super().__init__()
        self.size = size

    def forward(self, x):
        return F.interpolate(x, size=(self.size, self.size), mode="nearest")


class SVInvNet(nn.Module):
    def __init__(self, cfg: NetConfig = NetConfig()):
        super().__init__()
        self.cfg = cfg
        dense = cfg.dense
        db_out = dense.out_channels

        layers = []
        cin = cfg.in_shots
        for k, s, p, cout in cfg.time_reduction:
            layers.append(nn.Sequential(
                nn.Conv2d(cin, cout, (k, 1), (s, 1), (p, 0)),
                nn.BatchNorm2d(cout),
                nn.ReLU(inplace=True),
            ))
            cin = cout
        self.time_reduce = nn.Sequential(*layers)

        # encoder stages: dense blocks + transition to the next size
        self.enc_stages = nn.ModuleList()
        self.transitions = nn.ModuleList()
        sizes = [s for s, _ in cfg.encoder_blocks]
        c = cin
        self._skip_channels: dict[int, int] = {}
        for idx, (size, n_blocks) in enumerate(cfg.encoder_blocks):
            blocks = nn.ModuleList()
            for _ in range(n_blocks):
                blocks.append(DenseBlock(c, dense))
                c = db_out
            self.enc_stages.append(blocks)
            concat_c = db_out * n_blocks
            if size in cfg.skip_sizes:
                self._skip_channels[size] = concat_c
            if idx < len(cfg.encoder_blocks) - 1:
                nxt = sizes[idx + 1]
                if nxt == size // 2 + 1:
                    tr = Con2D(concat_c, cfg.transition_channels, kernel=2, stride=2, padding=1)
                elif nxt == size // 2:
                    tr = Con2D(concat_c, cfg.transition_channels, kernel=2, stride=2, padding=0)
                else:
                    # no integer stride reaches this size; reduce channels at
                    # 1x1 and pool to the exact target
                    tr = nn.Sequential(
                        Con2D(concat_c, cfg.transition_channels, kernel=1, stride=1, padding=0),
                        nn.AdaptiveAvgPool2d(nxt),
                    )
                self.transitions.append(tr)
                c = cfg.transition_channels

        # decoder stages
        self.up_convs = nn.ModuleList()
        self.dec_stages = nn.ModuleList()
        c = db_out
        for (size, n_blocks), width in zip(cfg.decoder_blocks, cfg.decoder_channels):
            self.up_convs.append(nn.Sequential(_Resize(size), Con2D(c, width)))
            c = width + self._skip_channels.get(size, 0)
            blocks = nn.ModuleList()
            for _ in range(n_blocks):
                blocks.append(DenseBlock(c, dense))
                c = db_out
            self.dec_stages.append(blocks)
        self.head = nn.Conv2d(db_out, 1, kernel_size=1)

    def forward(self, x):
        x = self.time_reduce(x)
        skips: dict[int, torch.Tensor] = {}
        for idx, blocks in enumerate(self.enc_stages):
            outs = []
            for block in blocks:
                x = block(x)
                outs.append(x)
            size = self.cfg.encoder_blocks[idx][0]
            cat = torch.cat(outs, dim=1) if len(outs) > 1 else outs[0]
            if size in self.cfg.skip_sizes:
                skips[size] = cat
            if idx < len(self.transitions):
                x = self.transitions[idx](cat)
        for idx, (up, blocks) in enumerate(zip(self.up_convs, self.dec_stages)):
            x = up(x)
            size = self.cfg.decoder_blocks[idx][0]
            if size in skips:
                x = torch.cat([x, skips[size]], dim=1)
            for block in blocks:
                x = block(x)
        return torch.sigmoid(self.head(x))


def build_model(cfg: NetConfig = NetConfig()) -> SVInvNet:
    return SVInvNet(cfg)


def parameter_count(model: nn.Module) -> int:
    return sum(p.numel() for p in model.parameters() if p.requires_grad)


def time_axis_trace(cfg: NetConfig = NetConfig()) -> list[int]:
    """Lengths of the time axis after each 1D reduction layer."""
    n = cfg.n_t
    trace = [n]
    for k, s, p, _ in cfg.time_reduction:
        n = (n + 2 * p - k) // s + 1
        trace.append(n)
    return trace
