import torch
from beartype.typing import Dict, Iterable, List, Optional, Protocol, Tuple

from ..configs import OptimConfig
from ..utils.error_handler import NonFiniteGradientError


class LossModel(Protocol):
    def loss(self, batch: object) -> torch.Tensor: ...

    def named_parameters(self) -> Iterable[Tuple[str, torch.nn.Parameter]]: ...


class AdamOptimizer:
    """
    Adam over a fixed parameter list with global-norm clipping. Gradients are
    checked for finiteness before anything is touched, so a diverging step leaves
    parameters and moments unchanged.
    """

    def __init__(
        self,
        params: Iterable[torch.nn.Parameter],
        config: Optional[OptimConfig] = None,
    ) -> None:
        self.config = config or OptimConfig()
        self.params: List[torch.nn.Parameter] = list(params)
        self.optimizer = torch.optim.Adam(
            self.params,
            lr=self.config.lr,
            betas=(self.config.beta1, self.config.beta2),
            eps=self.config.eps,
            foreach=False,
        )
        self.step_count = 0

    def step(self, grads: Optional[List[torch.Tensor]] = None) -> float:
        """
        Applies one update. ``grads`` (one per parameter) replace ``.grad`` when given.
        :return: the global gradient norm before clipping.
        """
        if grads is not None:
            if len(grads) != len(self.params):
                raise ValueError(f'{len(grads)} gradients for {len(self.params)} params')
            for param, grad in zip(self.params, grads):
                if grad.shape != param.shape:
                    raise ValueError(
                        f'gradient shape {tuple(grad.shape)} vs {tuple(param.shape)}'
                    )
                param.grad = grad.detach().clone()
        for param in self.params:
            if param.grad is None:
                param.grad = torch.zeros_like(param)
            if not bool(torch.isfinite(param.grad).all()):
                raise NonFiniteGradientError('non-finite gradient; training diverged')
        norm = torch.linalg.vector_norm(
            torch.stack([torch.linalg.vector_norm(p.grad) for p in self.params])  # type: ignore[arg-type]
        )
        if self.config.clip_norm is not None:
            torch.nn.utils.clip_grad_norm_(self.params, self.config.clip_norm)
        self.optimizer.step()
        self.step_count += 1
        return float(norm)

    def zero_grad(self) -> None:
        self.optimizer.zero_grad(set_to_none=True)

    def moments(self) -> List[Tuple[torch.Tensor, torch.Tensor]]:
        """(first, second) moment tensors per parameter; zeros before the first step."""
        out = []
        for param in self.params:
            state = self.optimizer.state.get(param, {})
            out.append(
                (
                    state.get('exp_avg', torch.zeros_like(param)).detach(),
                    state.get('exp_avg_sq', torch.zeros_like(param)).detach(),
                )
            )
        return out

    def load_moments(
        self, moments: List[Tuple[torch.Tensor, torch.Tensor]], step: int
    ) -> None:
        if len(moments) != len(self.params):
            raise ValueError('moment count does not match parameter count')
        for param, (first, second) in zip(self.params, moments):
            self.optimizer.state[param] = {
                'step': torch.tensor(float(step)),
                'exp_avg': first.clone().to(param.dtype),
                'exp_avg_sq': second.clone().to(param.dtype),
            }
        self.step_count = step


def adam_step(
    optimizer: AdamOptimizer, grads: Dict[str, torch.Tensor], names: List[str]
) -> float:
    """
    Functional form of one update: ``grads`` keyed by parameter name, ``names``
    giving the optimizer's parameter order.
    """
    return optimizer.step([grads[name] for name in names])


def trainable_parameters(
    model: LossModel,
) -> List[Tuple[str, torch.nn.Parameter]]:
    return [(name, p) for name, p in model.named_parameters() if p.requires_grad]


def end_to_end_gradient(
    model: LossModel, batch: object
) -> Dict[str, torch.Tensor]:
    """
    Gradient of the model's mean loss on ``batch`` with respect to every named
    parameter (zeros for parameters the loss does not reach).
    """
    named = trainable_parameters(model)
    loss = model.loss(batch)
    grads = torch.autograd.grad(loss, [p for _, p in named], allow_unused=True)
    return {
        name: grad if grad is not None else torch.zeros_like(param)
        for (name, param), grad in zip(named, grads)
    }
