import os

import numpy as np
import yaml
from beartype.typing import Dict, List, Optional
from pydantic import BaseModel, Field, model_validator

REPORT_FILE = 'report.yaml'
ARRAY_SUFFIX = '.f64'


def temperature_key(temperature: float) -> str:
    return f't{temperature:g}'


class EvalReport(BaseModel):
    """
    Everything one evaluation run measured. Saved as ``report.yaml`` plus raw
    little-endian float64 arrays (confusion matrix, per-setting p-value volumes)
    next to it.
    """

    seed: int
    temperatures: List[float]
    n_perm: int
    alpha: float
    fdr: bool = False
    subjects: List[str]
    grid_shape: List[int]
    reconstruction_errors: Dict[str, List[float]]
    mean_reconstruction_error: Dict[str, float] = Field(default_factory=dict)
    baseline_errors: List[float]
    baseline_mean_error: float = 0.0
    baseline_ratio: Optional[float] = None
    confusion: List[List[float]]
    confusion_runs: int = Field(default=1, ge=1)
    dominance: float
    subset_dominance: List[float] = Field(default_factory=list)
    p_values: Dict[str, List[float]] = Field(default_factory=dict)
    significant_fraction: Dict[str, float] = Field(default_factory=dict)
    iou: Dict[str, float] = Field(default_factory=dict)
    failures: List[str] = Field(default_factory=list)

    @model_validator(mode='after')
    def check_report(self) -> 'EvalReport':
        for key, errors in self.reconstruction_errors.items():
            if any(e < 0 for e in errors):
                raise ValueError(f'negative reconstruction error under {key}')
            self.mean_reconstruction_error[key] = float(np.mean(errors))
        if any(len(row) != len(self.subjects) for row in self.confusion) or len(
            self.confusion
        ) != len(self.subjects):
            raise ValueError('confusion matrix needs one row and column per subject')
        for name, p in self.p_values.items():
            if any(not 0.0 <= v <= 1.0 for v in p):
                raise ValueError(f'p-values of {name} outside [0, 1]')
        self.baseline_mean_error = float(np.mean(self.baseline_errors))
        first = temperature_key(self.temperatures[0])
        if first in self.mean_reconstruction_error and self.baseline_mean_error > 0:
            self.baseline_ratio = (
                self.mean_reconstruction_error[first] / self.baseline_mean_error
            )
        return self

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def mean_subset_dominance(self) -> Optional[float]:
        return float(np.mean(self.subset_dominance)) if self.subset_dominance else None

    def p_volume(self, setting: str) -> np.ndarray:
        return np.asarray(self.p_values[setting]).reshape(self.grid_shape)

    def save(self, directory: str) -> str:
        os.makedirs(directory, exist_ok=True)
        summary = self.model_dump(mode='json', exclude={'p_values'})
        summary['mean_subset_dominance'] = self.mean_subset_dominance
        path = os.path.join(directory, REPORT_FILE)
        with open(path, 'w') as f:
            yaml.dump(summary, f, sort_keys=False)
        write_array(os.path.join(directory, 'confusion' + ARRAY_SUFFIX), self.confusion)
        for name in self.p_values:
            write_array(
                os.path.join(directory, f'pvalues_{name}{ARRAY_SUFFIX}'),
                self.p_volume(name),
            )
        return path

    @classmethod
    def load(cls, directory: str) -> 'EvalReport':
        with open(os.path.join(directory, REPORT_FILE), 'r') as f:
            data = yaml.safe_load(f)
        data.pop('mean_subset_dominance', None)
        p_values = {}
        for file_name in sorted(os.listdir(directory)):
            if file_name.startswith('pvalues_') and file_name.endswith(ARRAY_SUFFIX):
                name = file_name[len('pvalues_') : -len(ARRAY_SUFFIX)]
                p_values[name] = read_array(os.path.join(directory, file_name)).tolist()
        return cls(**data, p_values=p_values)


def write_array(path: str, values: object) -> None:
    with open(path, 'wb') as f:
        f.write(np.asarray(values, dtype='<f8').tobytes(order='C'))


def read_array(path: str) -> np.ndarray:
    with open(path, 'rb') as f:
        return np.frombuffer(f.read(), dtype='<f8').astype(np.float64)
