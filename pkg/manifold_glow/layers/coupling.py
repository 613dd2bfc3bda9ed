import torch
from beartype.typing import List, Optional, Tuple
from torch import nn

from ..geometry import Manifold
from ..nn import MLP
from ..nn.network import Activation
from ..utils.error_handler import (
    DivisibilityError,
    ShapeMismatchError,
    attach_layer_index,
)
from .layer_base import FlowLayer, LayerOutput


class AffineCoupling(FlowLayer):
    """
    Affine coupling: one part X_a of the input passes through unchanged and
    parameterizes Y_b = T . Phi^{-1}(S * Phi(X_b)) for the other part, where
    (S, T) come from a per-location network applied to Phi(X_a).

    The partition is along channels (X_a = first C // 2 channels) unless
    ``slices`` (tau) is set: then the leading spatial axis is cut into 2 tau
    contiguous slices and slice 2k + parity conditions slice 2k + 1 - parity, with
    one network shared by all k pairs (``share=True``) or one network per pair.

    log S = bound * tanh(raw / bound), so scales stay within exp(+-bound).
    """

    def __init__(
        self,
        manifold: Manifold,
        channels: int,
        hidden_width: int = 64,
        hidden_layers: int = 2,
        activation: Activation = 'tanh',
        scale_bound: float = 2.0,
        slices: Optional[int] = None,
        share: bool = True,
        parity: int = 0,
    ) -> None:
        super().__init__(manifold)
        m, group_dim = manifold.dim, manifold.group_dim
        self.channels = channels
        self.scale_bound = scale_bound
        self.slices = slices
        self.share = share
        self.parity = parity
        self.fault_unclamped = False
        hidden = [hidden_width] * hidden_layers
        if slices is None:
            if channels < 2:
                raise ShapeMismatchError('channel coupling needs at least 2 channels')
            self.c_a = channels // 2
            self.c_b = channels - self.c_a
            widths = [self.c_a * m] + hidden + [self.c_b * (m + group_dim)]
            n_nets = 1
        else:
            self.c_a = self.c_b = channels
            widths = [channels * m] + hidden + [channels * (m + group_dim)]
            n_nets = 1 if share else slices
        self.nets = nn.ModuleList(MLP(widths, activation) for _ in range(n_nets))

    def _params(self, x_a: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
        """
        Scale and group parameters for X_b from X_a.
        :return: (log_s used for the logdet, log-scale actually applied, group elements)
        """
        m = self.manifold.dim
        if self.slices is None or self.share:
            raw = self.nets[0](x_a.flatten(-2))
        else:
            raw = torch.stack(
                [net(x_a[:, k].flatten(-2)) for k, net in enumerate(self.nets)], dim=1
            )
        expected = self.nets[0].out_features
        if raw.shape[-1] != expected:
            raise ShapeMismatchError(f'network output width {raw.shape[-1]} != {expected}')
        raw = raw.reshape(raw.shape[:-1] + (self.c_b, -1))
        raw_s, raw_t = raw[..., :m], raw[..., m:]
        log_s = self.scale_bound * torch.tanh(raw_s / self.scale_bound)
        applied = raw_s if self.fault_unclamped else log_s
        return log_s, applied, self.manifold.group_from_raw(raw_t)

    def _split(self, v: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor]:
        if self.slices is None:
            return v[..., : self.c_a, :], v[..., self.c_a :, :]
        tau = self.slices
        extent = v.shape[1]
        if extent % (2 * tau) != 0:
            raise DivisibilityError(f'leading extent {extent} not divisible by {2 * tau}')
        paired = v.reshape((v.shape[0], tau, 2, extent // (2 * tau)) + v.shape[2:])
        return paired[:, :, self.parity], paired[:, :, 1 - self.parity]

    def _join(self, v_like: torch.Tensor, a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
        if self.slices is None:
            return torch.cat([a, b], dim=-2)
        parts: List[torch.Tensor] = [a, b] if self.parity == 0 else [b, a]
        return torch.stack(parts, dim=2).reshape(v_like.shape)

    @attach_layer_index
    def forward(self, v: torch.Tensor) -> LayerOutput:
        x_a, x_b = self._split(v)
        log_s, applied, group = self._params(x_a)
        y_b, group_logdet = self.manifold.group_chart_forward(
            group, x_b * torch.exp(applied)
        )
        y = self._join(v, x_a, y_b)
        self.manifold.check_chart(y)
        logdet = self.batch_logdet(v, log_s) + self.batch_logdet(v, group_logdet)
        return y, logdet

    @attach_layer_index
    def inverse(self, y: torch.Tensor) -> LayerOutput:
        y_a, y_b = self._split(y)
        log_s, applied, group = self._params(y_a)
        u, group_logdet = self.manifold.group_chart_forward(
            self.manifold.group_inverse(group), y_b
        )
        x = self._join(y, y_a, u * torch.exp(-applied))
        self.manifold.check_chart(x)
        logdet = self.batch_logdet(y, group_logdet) - self.batch_logdet(y, log_s)
        return x, logdet
