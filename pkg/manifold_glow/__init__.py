import torch

torch.set_default_dtype(torch.float64)

__version__ = '0.0.1'
