from manifold_glow.configs import ManifoldKind, RunConfig, StreamConfig

SPHERE3 = ManifoldKind(kind='sphere', n=3)
SPHERE12 = ManifoldKind(kind='sphere', n=12)
POSITIVE_REALS = ManifoldKind(kind='positive_reals')
SPD2_LOG = ManifoldKind(kind='spd', n=2)
SPD2_CHOLESKY = ManifoldKind(kind='spd', n=2, chart='cholesky')
SPD3 = ManifoldKind(kind='spd', n=3)

tiny_positive_stream = StreamConfig(
    manifold=POSITIVE_REALS,
    channels=2,
    levels=1,
    blocks_per_level=2,
    hidden_width=8,
    hidden_layers=1,
)

example_config_data = {
    'seed': 0,
    'threads': 1,
    'out_dir': 'runs/test',
    'source': {
        'manifold': {'kind': 'spd', 'n': 3},
        'channels': 1,
        'levels': 2,
        'blocks_per_level': 1,
        'hidden_width': 8,
        'hidden_layers': 1,
    },
    'target': {
        'manifold': {'kind': 'sphere', 'n': 6, 'pole': 'uniform'},
        'channels': 1,
        'levels': 2,
        'blocks_per_level': 1,
        'hidden_width': 8,
        'hidden_layers': 1,
        'actnorm_init_std': 0.5,
    },
    'transfer': {'width': 16, 'residual_blocks': 1},
    'train': {
        'steps': 4,
        'batch_size': 4,
        'init_batch_size': 8,
        'checkpoint_every': 2,
    },
    'data': {
        'generator': 'paired',
        'seed': 0,
        'grid_shape': [4, 4],
        'count': 16,
        'n_dirs': 6,
        'noise': 0.02,
        'split_fraction': 0.5,
    },
    'eval': {
        'n_perm': 100,
        'temperatures': [0.0],
        'confusion_k': 4,
        'confusion_repeats': 3,
    },
    'check': {'cases': 2},
}

example_config = RunConfig(**example_config_data)
