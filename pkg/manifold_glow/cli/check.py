"""
Verification suite behind ``manifold-glow check``: round trips, analytic
log-determinants against finite differences, and gradients against finite
differences, each reported with its worst case over seeded random draws.
"""

import os

import torch
import yaml
from beartype.typing import Callable, Dict, List, Tuple
from pydantic import BaseModel
from torch import nn

from ..configs import ManifoldKind, RunConfig, StreamConfig
from ..geometry import Manifold, get_manifold
from ..layers import Actnorm, AffineCoupling, Conv1x1, FlowLayer, squeeze, unsqueeze
from ..models import FlowModel
from ..nn import end_to_end_gradient, trainable_parameters
from ..oracle import NumericJacobianConfig, fd_gradient, fd_logdet, tensor_map
from ..utils.error_handler import ChartDomainError, ManifoldGlowError, ThresholdFailure
from ..utils.logger import logger

CHECK_KINDS: Dict[str, ManifoldKind] = {
    'sphere3': ManifoldKind(kind='sphere', n=3),
    'sphere12': ManifoldKind(kind='sphere', n=12),
    'positive_reals': ManifoldKind(kind='positive_reals', n=1),
    'spd2_log': ManifoldKind(kind='spd', n=2, chart='matrix_log'),
    'spd2_cholesky': ManifoldKind(kind='spd', n=2, chart='cholesky'),
    'spd3': ManifoldKind(kind='spd', n=3),
}

# parameter and point spreads that keep random sphere layers inside the chart ball
PARAM_SCALE = {'sphere': 0.2, 'positive_reals': 1.0, 'spd': 0.5}
POINT_SPREAD = {'sphere': 0.2, 'positive_reals': 0.5, 'spd': 0.5}

# 3d grid, so layer reshapes run over every spatial axis
GRID: Tuple[int, ...] = (2, 2, 2)
CHANNELS = 4
# squeezed to one voxel of four channels, coupled by both parities
MODEL_GRID: Tuple[int, ...] = (2, 2)


class CheckResult(BaseModel):
    name: str
    worst: float
    tolerance: float
    passed: bool


class CheckReport(BaseModel):
    results: List[CheckResult]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def failures(self) -> List[str]:
        return [r.name for r in self.results if not r.passed]


@torch.no_grad()
def randomize_parameters(
    module: nn.Module, generator: torch.Generator, scale: float
) -> None:
    """Overwrites every parameter with scale * N(0, 1) draws."""
    for param in module.parameters():
        param.copy_(scale * torch.randn(param.shape, generator=generator))


def build_layers(manifold: Manifold) -> Dict[str, FlowLayer]:
    return {
        'actnorm': Actnorm(manifold, CHANNELS, GRID),
        'conv1x1': Conv1x1(manifold, CHANNELS),
        'coupling': AffineCoupling(manifold, CHANNELS, hidden_width=8, hidden_layers=1),
        'coupling_sliced': AffineCoupling(
            manifold, CHANNELS, hidden_width=8, hidden_layers=1, slices=1
        ),
    }


def random_case(
    manifold: Manifold, layer: FlowLayer, seed: int, batch: int
) -> torch.Tensor:
    """Randomizes ``layer`` and returns chart coordinates of a random batch."""
    generator = torch.Generator().manual_seed(seed)
    randomize_parameters(layer, generator, PARAM_SCALE[manifold.kind.kind])
    points = manifold.random_points(
        (batch,) + GRID + (CHANNELS,), generator, POINT_SPREAD[manifold.kind.kind]
    )
    return manifold.chart_forward(points)


class CheckSuite:
    def __init__(self, config: RunConfig) -> None:
        self.config = config
        self.cases = config.check.cases
        self.fault = config.check.inject_fault
        self.fd = NumericJacobianConfig(step=config.check.fd_step)
        self.geometry = config.geometry
        self.results: List[CheckResult] = []

    def record(self, name: str, worst: float, tolerance: float) -> None:
        passed = worst <= tolerance
        self.results.append(
            CheckResult(name=name, worst=worst, tolerance=tolerance, passed=passed)
        )
        msg_type = 'PASS' if passed else 'FAIL'
        logger.info(
            f'{msg_type} {name}: worst {worst:.3e} (tolerance {tolerance:.0e})',
            extra={'msg_type': msg_type},
        )

    def guarded(self, name: str, tolerance: float, fn: Callable[[], float]) -> None:
        try:
            worst = fn()
        except ManifoldGlowError as e:
            logger.error(f'{name}: {e}', extra={'msg_type': 'FAIL'})
            worst = float('inf')
        self.record(name, worst, tolerance)

    def manifold(self, label: str) -> Manifold:
        return get_manifold(CHECK_KINDS[label], self.geometry)

    def check_chart_round_trip(self, label: str) -> float:
        manifold = self.manifold(label)
        worst = 0.0
        for case in range(self.cases):
            generator = torch.Generator().manual_seed(self.config.seed + case)
            # unit expected chart radius stays clear of the sphere cut locus
            spread = manifold.dim ** -0.5
            x = manifold.random_points((16,), generator, spread=spread)
            back = manifold.chart_inverse(manifold.chart_forward(x))
            worst = max(worst, float(manifold.distance(back, x).max()))
        return worst

    def over_cases(
        self,
        label: str,
        layer_name: str,
        measure: Callable[[Manifold, FlowLayer, int], float],
    ) -> float:
        """
        Worst value of ``measure`` over the random cases. Cases whose random
        parameters push the input out of the chart domain are skipped; the
        property fails only if no case is usable.
        """
        manifold = self.manifold(label)
        worst, usable = 0.0, 0
        for case in range(self.cases):
            layer = build_layers(manifold)[layer_name]
            if isinstance(layer, AffineCoupling):
                layer.fault_unclamped = self.fault == 'scale_clamp'
            try:
                worst = max(worst, measure(manifold, layer, self.config.seed + case))
            except ChartDomainError:
                continue
            usable += 1
        if usable == 0:
            raise ChartDomainError(f'no usable case for {layer_name} on {label}')
        return worst

    def layer_round_trip(
        self, manifold: Manifold, layer: FlowLayer, seed: int
    ) -> float:
        v = random_case(manifold, layer, seed, batch=8)
        with torch.no_grad():
            y, _ = layer(v)
            back, _ = layer.inverse(y)
        distance = manifold.distance(
            manifold.chart_inverse(back), manifold.chart_inverse(v)
        )
        return float(distance.max())

    def layer_logdet(self, manifold: Manifold, layer: FlowLayer, seed: int) -> float:
        """|analytic - numeric| / max(1, |analytic|) for one random case."""
        v = random_case(manifold, layer, seed, batch=1)
        with torch.no_grad():
            _, analytic = layer(v)
        numeric = fd_logdet(
            tensor_map(lambda t: layer(t)[0], tuple(v.shape)),
            v.numpy().ravel(),
            self.fd,
        )
        value = float(analytic[0])
        return abs(value - numeric) / max(1.0, abs(value))

    def check_squeeze(self) -> float:
        generator = torch.Generator().manual_seed(self.config.seed)
        v = torch.randn((2, 4, 2, 2, 3, 2), generator=generator)
        back = unsqueeze(squeeze(v), (4, 2, 2))
        return float((back - v).abs().max())

    def tiny_model(self, seed: int) -> Tuple[FlowModel, torch.Tensor]:
        stream = StreamConfig(
            manifold=CHECK_KINDS['positive_reals'],
            channels=1,
            levels=1,
            blocks_per_level=2,
            hidden_width=4,
            hidden_layers=1,
        )
        model = FlowModel(stream, MODEL_GRID, self.geometry)
        generator = torch.Generator().manual_seed(seed)
        randomize_parameters(model, generator, 0.5)
        points = model.manifold.random_points((4,) + MODEL_GRID + (1,), generator)
        return model, points

    def check_model_logdet(self) -> float:
        model, points = self.tiny_model(self.config.seed)
        for coupling in model.coupling_layers():
            coupling.fault_unclamped = self.fault == 'scale_clamp'
        v = model.to_coords(points[:1])

        def flat_latents(t: torch.Tensor) -> torch.Tensor:
            latents, _ = model.forward_coords(t)
            return torch.cat([z.reshape(-1) for z in latents])

        with torch.no_grad():
            _, analytic = model.forward_coords(v)
        numeric = fd_logdet(
            tensor_map(flat_latents, tuple(v.shape)), v.numpy(), self.fd
        )
        value = float(analytic[0])
        return abs(value - numeric) / max(1.0, abs(value))

    def check_gradient(self) -> float:
        model, points = self.tiny_model(self.config.seed + 1)
        analytic = end_to_end_gradient(model, points)
        worst = 0.0
        for name, param in trainable_parameters(model):
            original = param.detach().clone()

            def loss_at(values: object, p: nn.Parameter = param) -> float:
                with torch.no_grad():
                    p.copy_(torch.as_tensor(values))
                    return float(model.loss(points))

            numeric = fd_gradient(loss_at, original.numpy(), self.fd)
            with torch.no_grad():
                param.copy_(original)
            scale = max(1.0, float(analytic[name].abs().max()))
            diff = (analytic[name] - torch.from_numpy(numeric)).abs().max()
            worst = max(worst, float(diff) / scale)
        return worst

    def run(self) -> CheckReport:
        tol = self.geometry
        for label in CHECK_KINDS:
            self.guarded(
                f'chart round trip [{label}]',
                tol.round_trip_tol,
                lambda label=label: self.check_chart_round_trip(label),
            )
            for layer_name in build_layers(self.manifold(label)):
                self.guarded(
                    f'{layer_name} round trip [{label}]',
                    tol.round_trip_tol,
                    lambda label=label, layer_name=layer_name: (
                        self.over_cases(label, layer_name, self.layer_round_trip)
                    ),
                )
                self.guarded(
                    f'{layer_name} logdet vs finite differences [{label}]',
                    tol.fd_agreement,
                    lambda label=label, layer_name=layer_name: (
                        self.over_cases(label, layer_name, self.layer_logdet)
                    ),
                )
        self.guarded('squeeze round trip', 0.0, self.check_squeeze)
        self.guarded(
            'model logdet vs finite differences',
            tol.fd_agreement,
            self.check_model_logdet,
        )
        self.guarded(
            'gradient vs finite differences', tol.fd_agreement, self.check_gradient
        )
        return CheckReport(results=self.results)


def cmd_check(config: RunConfig, out_dir: str = '') -> CheckReport:
    """
    Runs the suite; writes ``check_report.yaml`` and raises ThresholdFailure if
    any property fails.
    """
    logger.info('verification suite', extra={'msg_type': 'STEP'})
    report = CheckSuite(config).run()
    out_dir = out_dir or config.out_dir
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, 'check_report.yaml'), 'w') as f:
        yaml.dump(report.model_dump(mode='json'), f, sort_keys=False)
    if not report.passed:
        raise ThresholdFailure(
            f'{len(report.failures)} check(s) failed: {report.failures}'
        )
    return report
