import os

import yaml
from beartype.typing import Dict, List, Optional, Tuple

from ..configs import RunConfig
from ..data import (
    Field,
    PairedDataset,
    read_dataset,
    read_field,
    split_dataset,
    synth_paired,
    synth_texture_pair,
    write_dataset,
    write_field,
)
from ..engines import CHECKPOINT_FILE, TrainSummary, train_conditional
from ..evaluators import EvalReport, evaluate, temperature_key
from ..models import ConditionalFlow, load_checkpoint
from ..utils.error_handler import CheckpointShapeError, ThresholdFailure
from ..utils.logger import logger

GENERATED_DIR = 'generated'
GENERATION_FILE = 'generation.yaml'
EVAL_DIR = 'eval'
FIELD_SUFFIX = '.mfld'


def synth_dataset(config: RunConfig) -> PairedDataset:
    data = config.data
    if data.generator == 'texture':
        return synth_texture_pair(data.seed, tuple(data.grid_shape), data.count)
    return synth_paired(
        data.seed,
        tuple(data.grid_shape),
        data.count,
        n_dirs=data.n_dirs,
        noise=data.noise,
        smoothness=data.smoothness,
        group_effect=data.group_effect,
    )


def load_splits(config: RunConfig) -> Tuple[PairedDataset, PairedDataset]:
    dataset = read_dataset(config.data_dir)
    return split_dataset(dataset, config.data.split_fraction, config.data.seed)


def cmd_synth(config: RunConfig) -> str:
    logger.info(
        f'synthesizing {config.data.generator} data', extra={'msg_type': 'STEP'}
    )
    dataset = synth_dataset(config)
    manifest = write_dataset(dataset, config.data_dir)
    logger.info(
        f'wrote {len(dataset)} pairs to {config.data_dir}', extra={'msg_type': 'DATA'}
    )
    return manifest


def cmd_train(config: RunConfig, resume: Optional[str] = None) -> TrainSummary:
    logger.info('training', extra={'msg_type': 'STEP'})
    train, test = load_splits(config)
    logger.info(
        f'{len(train)} training pairs, {len(test)} held out', extra={'msg_type': 'DATA'}
    )
    _, summary = train_conditional(config, train, config.out_dir, resume)
    return summary


def load_conditional(
    config: RunConfig, checkpoint: Optional[str] = None
) -> ConditionalFlow:
    path = checkpoint or os.path.join(config.out_dir, CHECKPOINT_FILE)
    model = load_checkpoint(path).model
    if not isinstance(model, ConditionalFlow):
        raise CheckpointShapeError(f'{path} holds a single flow, not a conditional one')
    return model


def generated_dir(out_dir: str, temperature: float) -> str:
    return os.path.join(out_dir, GENERATED_DIR, temperature_key(temperature))


def read_inputs(directory: str) -> Tuple[List[str], List[Field]]:
    """Source field files of a directory, in file-name order."""
    files = sorted(f for f in os.listdir(directory) if f.endswith(FIELD_SUFFIX))
    names = [f[: -len(FIELD_SUFFIX)] for f in files]
    return names, [read_field(os.path.join(directory, f)) for f in files]


def cmd_generate(
    config: RunConfig,
    checkpoint: Optional[str] = None,
    temperature: Optional[float] = None,
    inputs: Optional[str] = None,
) -> Dict[float, List[Field]]:
    """
    Generates a target for every input source at each temperature and writes
    them as field files, with a ``generation.yaml`` recording seed, temperature
    and checkpoint next to them.

    :param inputs: directory of source field files; the held-out split by default.
    """
    logger.info('generating', extra={'msg_type': 'STEP'})
    model = load_conditional(config, checkpoint)
    if inputs is None:
        _, test = load_splits(config)
        names, sources = list(test.names), test.sources
    else:
        names, sources = read_inputs(inputs)
    temperatures = config.eval.temperatures if temperature is None else [temperature]
    generated: Dict[float, List[Field]] = {}
    for t in temperatures:
        fields = model.generate_fields(sources, t, config.seed)
        directory = generated_dir(config.out_dir, t)
        os.makedirs(directory, exist_ok=True)
        for name, field in zip(names, fields):
            path = os.path.join(directory, f'generated_{name}{FIELD_SUFFIX}')
            write_field(path, field)
        with open(os.path.join(directory, GENERATION_FILE), 'w') as f:
            yaml.dump(
                {
                    'seed': config.seed,
                    'temperature': t,
                    'checkpoint': checkpoint
                    or os.path.join(config.out_dir, CHECKPOINT_FILE),
                    'subjects': names,
                },
                f,
                sort_keys=False,
            )
        generated[t] = fields
        logger.info(
            f'wrote {len(fields)} fields at temperature {t:g} to {directory}',
            extra={'msg_type': 'DATA'},
        )
    return generated


def read_generated(
    out_dir: str, temperature: float, names: List[str]
) -> Optional[List[Field]]:
    directory = generated_dir(out_dir, temperature)
    paths = [
        os.path.join(directory, f'generated_{name}{FIELD_SUFFIX}') for name in names
    ]
    if not all(os.path.exists(p) for p in paths):
        return None
    return [read_field(p) for p in paths]


def repeat_generations(
    config: RunConfig, test: PairedDataset, checkpoint: Optional[str] = None
) -> List[List[Field]]:
    """
    The extra ``generation_repeats - 1`` runs at the first temperature, seeded
    ``seed + 1``, ``seed + 2`` and so on; none at temperature 0, whose mode
    path does not depend on the seed.
    """
    temperature = config.eval.temperatures[0]
    repeats = config.eval.generation_repeats
    if repeats == 1 or temperature == 0.0:
        return []
    model = load_conditional(config, checkpoint)
    logger.info(
        f'{repeats - 1} more generation runs at temperature {temperature:g}',
        extra={'msg_type': 'EVAL'},
    )
    return [
        model.generate_fields(test.sources, temperature, config.seed + r)
        for r in range(1, repeats)
    ]


def cmd_eval(config: RunConfig, checkpoint: Optional[str] = None) -> EvalReport:
    """
    Evaluates generated fields (generating any that are missing) and raises
    ThresholdFailure when a configured threshold is not met.
    """
    logger.info('evaluating', extra={'msg_type': 'STEP'})
    train, test = load_splits(config)
    generated: Dict[float, List[Field]] = {}
    for t in config.eval.temperatures:
        fields = read_generated(config.out_dir, t, list(test.names))
        if fields is None:
            fields = cmd_generate(config, checkpoint, t)[t]
        generated[t] = fields
    repeat_runs = repeat_generations(config, test, checkpoint)
    report = evaluate(
        test,
        generated,
        train.targets,
        config.eval,
        config.seed,
        config.geometry,
        os.path.join(config.out_dir, EVAL_DIR),
        repeat_runs,
    )
    if report.failures:
        raise ThresholdFailure('; '.join(report.failures))
    return report
