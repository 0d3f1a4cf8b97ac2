"""
默认配置设置

提供系统默认配置值，当配置文件缺少某些字段时使用这些默认值
"""

DEFAULT_CONFIG = {
    'experiment': {
        'kind': 'sweep-snr',
        'n': 20,
        'm': 5,
        'snr_db': 0.0,
        'snr_sweep': None,
        'eig_range': [0.1, 2.0],
        'shared_eigenbasis': False,
        'random_transforms': 0,
        'trials': 0,
        'seed': 20240101
    },
    'inspect': {
        'sigma_x': None,
        'sigma_e': None,
        'transform': None
    },
    'montecarlo': {
        'workers': 1,
        'block_size': 10000
    },
    'output': {
        'path': './results/{kind}.csv',
        'float_digits': 12
    },
    'logging': {
        'level': 'INFO',
        'file': './logs/partial_detect.log',
        'max_size': 10,
        'backup_count': 5
    }
}

EXPERIMENT_KINDS = ('random-vs-opt', 'sweep-snr', 'sweep-m', 'sweep-n', 'inspect')
SWEEP_KINDS = ('sweep-snr', 'sweep-m', 'sweep-n')
