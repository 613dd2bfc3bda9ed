import torch
from beartype.typing import List, Type

from ..layers import Actnorm, AffineCoupling, Conv1x1, FlowLayer
from ..utils.error_handler import ShapeMismatchError
from ..utils.logger import logger
from .flow_model import FlowModel


def coupling_parameter_count(model: FlowModel) -> int:
    return sum(
        p.numel() for layer in model.coupling_layers() for p in layer.parameters()
    )


def _layers_of(model: FlowModel, layer_type: Type[FlowLayer]) -> List[FlowLayer]:
    return [layer for layer in model.layers if isinstance(layer, layer_type)]


@torch.no_grad()
def nanoflow_share(model: FlowModel, tau: int) -> FlowModel:
    """
    Rebuilds ``model`` with slice coupling: the leading spatial axis is cut into
    2 tau slices and one coupling network per layer serves all tau slice pairs.

    Actnorm, 1x1 convolution and coupling state is copied; an unshared slice
    source contributes the network of its first pair. Channel-mode couplings
    have another shape and raise ShapeMismatchError.
    """
    config = model.config.model_copy(
        update={'nanoflow_tau': tau, 'nanoflow_share': True}
    )
    shared = FlowModel(config, model.grid_shape, model.tolerances)
    old_couplings: List[AffineCoupling] = model.coupling_layers()
    new_couplings: List[AffineCoupling] = shared.coupling_layers()
    if len(old_couplings) != len(new_couplings):
        raise ShapeMismatchError(
            f'source has {len(old_couplings)} coupling layers, '
            f'the shared model {len(new_couplings)}'
        )
    for index, (old_coupling, new_coupling) in enumerate(
        zip(old_couplings, new_couplings)
    ):
        old_widths = old_coupling.nets[0].widths
        new_widths = new_coupling.nets[0].widths
        if old_widths != new_widths:
            raise ShapeMismatchError(
                f'coupling {index} has widths {old_widths}, slice sharing needs '
                f'{new_widths}; share a model built with nanoflow_tau set'
            )
    for layer_type in (Actnorm, Conv1x1):
        pairs = zip(_layers_of(model, layer_type), _layers_of(shared, layer_type))
        for old, new in pairs:
            new.load_state_dict(old.state_dict())
    for old_coupling, new_coupling in zip(old_couplings, new_couplings):
        if len(old_coupling.nets) > 1:
            logger.warning(
                f'layer {old_coupling.index}: keeping the first of '
                f'{len(old_coupling.nets)} per-pair coupling networks',
                extra={'msg_type': 'DETAIL'},
            )
        new_coupling.nets[0].load_state_dict(old_coupling.nets[0].state_dict())
    shared.prior_mean.load_state_dict(model.prior_mean.state_dict())
    shared.prior_log_var.load_state_dict(model.prior_log_var.state_dict())
    return shared
