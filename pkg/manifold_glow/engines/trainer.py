import os
import time

import numpy as np
import torch
from beartype.typing import List, Optional, Tuple
from pydantic import BaseModel
from tqdm import tqdm

from ..configs import RunConfig
from ..data import PairedDataset, stack_fields
from ..models import ConditionalFlow, PairBatch, load_checkpoint, save_checkpoint
from ..nn import AdamOptimizer, trainable_parameters
from ..utils.error_handler import ChartDomainError, NumericalAbortError
from ..utils.logger import logger

CHECKPOINT_FILE = 'checkpoint.mgck'
METRICS_FILE = 'metrics.log'
TIMING_FILE = 'timing.log'


class TrainSummary(BaseModel):
    steps: int
    skipped: int
    first_loss: Optional[float] = None
    final_loss: Optional[float] = None
    checkpoint: str


def batch_indices(seed: int, step: int, count: int, size: int) -> np.ndarray:
    """Batch of step ``step``; depends only on (seed, step) so resumed runs match."""
    rng = np.random.default_rng([seed, step])
    return np.sort(rng.choice(count, size=size, replace=count < size))


def truncate_log(path: str, last_step: int) -> None:
    """Drops lines logged after ``last_step`` (a resumed run rewrites them)."""
    if not os.path.exists(path):
        return
    with open(path, 'r') as f:
        lines = [line for line in f if int(line.split('\t', 1)[0]) <= last_step]
    with open(path, 'w') as f:
        f.writelines(lines)


def read_losses(path: str) -> List[Optional[float]]:
    """Losses of ``metrics.log`` in step order, None for skipped steps."""
    if not os.path.exists(path):
        return []
    with open(path, 'r') as f:
        values = [line.rstrip('\n').split('\t', 1)[1] for line in f if line.strip()]
    return [None if v == 'skipped' else float(v) for v in values]


class Trainer:
    """
    Joint training of both streams and the latent transfer with Adam.

    ``metrics.log`` holds one ``step<TAB>loss`` line per step and is bitwise
    reproducible for a fixed seed and thread count; wall time goes to
    ``timing.log``. A checkpoint is written every ``checkpoint_every`` steps and
    at the end.
    """

    def __init__(
        self, config: RunConfig, dataset: PairedDataset, out_dir: Optional[str] = None
    ) -> None:
        torch.manual_seed(config.seed)
        torch.set_num_threads(config.threads)
        self.config = config
        self.out_dir = out_dir or config.out_dir
        os.makedirs(self.out_dir, exist_ok=True)
        self.sources = stack_fields(dataset.sources)
        self.targets = stack_fields(dataset.targets)
        self.model = ConditionalFlow(config)
        self.optimizer = AdamOptimizer(
            [p for _, p in trainable_parameters(self.model)], config.optim
        )
        self.step = 0
        self.history: List[Optional[float]] = []

    @property
    def skipped(self) -> int:
        return sum(loss is None for loss in self.history)

    @property
    def checkpoint_path(self) -> str:
        return os.path.join(self.out_dir, CHECKPOINT_FILE)

    def _batch(self, step: int, size: int) -> PairBatch:
        idx = torch.from_numpy(
            batch_indices(self.config.seed, step, self.sources.shape[0], size)
        )
        return self.sources[idx], self.targets[idx]

    def initialize(self) -> None:
        size = min(self.config.train.init_batch_size, self.sources.shape[0])
        self.model.initialize(self._batch(0, size))

    def resume(self, path: Optional[str] = None) -> bool:
        path = path or self.checkpoint_path
        if not os.path.exists(path):
            return False
        checkpoint = load_checkpoint(path, self.model)
        checkpoint.restore_optimizer(self.optimizer)
        self.step = checkpoint.step
        for name in (METRICS_FILE, TIMING_FILE):
            truncate_log(os.path.join(self.out_dir, name), self.step)
        self.history = read_losses(os.path.join(self.out_dir, METRICS_FILE))
        logger.info(
            f'resumed from step {self.step} ({self.skipped} steps skipped so far)',
            extra={'msg_type': 'TRAIN'},
        )
        return True

    def _log_step(self, step: int, loss: str, seconds: float) -> None:
        with open(os.path.join(self.out_dir, METRICS_FILE), 'a') as f:
            f.write(f'{step}\t{loss}\n')
        with open(os.path.join(self.out_dir, TIMING_FILE), 'a') as f:
            f.write(f'{step}\t{seconds:.6f}\n')

    def train_step(self, step: int) -> Optional[float]:
        """One update; returns the batch loss, or None if the step was skipped."""
        batch = self._batch(step + 1, self.config.train.batch_size)
        self.optimizer.zero_grad()
        try:
            loss = self.model.loss(batch)
        except ChartDomainError as e:
            logger.warning(f'step {step + 1} skipped: {e}', extra={'msg_type': 'TRAIN'})
            return None
        if not bool(torch.isfinite(loss)):
            raise NumericalAbortError(f'non-finite loss at step {step + 1}')
        loss.backward()
        self.optimizer.step()
        return float(loss)

    def run(self, resume: Optional[str] = None) -> TrainSummary:
        """
        :param resume: checkpoint to continue from; logs are rewritten from its step.
        """
        train = self.config.train
        if not (resume and self.resume(resume)):
            for name in (METRICS_FILE, TIMING_FILE):
                path = os.path.join(self.out_dir, name)
                if os.path.exists(path):
                    os.remove(path)
            self.initialize()
        consecutive = 0
        for previous in reversed(self.history):
            if previous is not None:
                break
            consecutive += 1
        progress = tqdm(range(self.step, train.steps), desc='Training', unit='step')
        for step in progress:
            started = time.perf_counter()
            loss = self.train_step(step)
            elapsed = time.perf_counter() - started
            self.history.append(loss)
            if loss is None:
                consecutive += 1
                self._log_step(step + 1, 'skipped', elapsed)
                if consecutive > train.max_skipped_steps:
                    raise NumericalAbortError(
                        f'{consecutive} consecutive steps left the chart domain'
                    )
            else:
                consecutive = 0
                self._log_step(step + 1, repr(loss), elapsed)
                progress.set_postfix(nll=f'{loss:.4f}')
            self.step = step + 1
            if self.step % train.checkpoint_every == 0 or self.step == train.steps:
                save_checkpoint(
                    self.model, self.checkpoint_path, self.optimizer, self.step
                )
        losses = [v for v in self.history if v is not None]
        if self.step == 0 or not os.path.exists(self.checkpoint_path):
            save_checkpoint(self.model, self.checkpoint_path, self.optimizer, self.step)
        summary = TrainSummary(
            steps=self.step,
            skipped=self.skipped,
            first_loss=losses[0] if losses else None,
            final_loss=losses[-1] if losses else None,
            checkpoint=self.checkpoint_path,
        )
        logger.info(
            f'trained {summary.steps} steps ({summary.skipped} skipped), '
            f'final nll {summary.final_loss}',
            extra={'msg_type': 'TRAIN'},
        )
        return summary


def train_conditional(
    config: RunConfig,
    dataset: PairedDataset,
    out_dir: Optional[str] = None,
    resume: Optional[str] = None,
) -> Tuple[ConditionalFlow, TrainSummary]:
    trainer = Trainer(config, dataset, out_dir)
    summary = trainer.run(resume=resume)
    return trainer.model, summary
