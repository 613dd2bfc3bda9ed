import argparse
import os

import torch
from beartype.typing import Any, Dict, List, Optional

from ..configs import load_config
from ..utils.error_handler import ManifoldGlowError, exit_code_for
from ..utils.logger import get_file_handler, logger
from .check import cmd_check
from .commands import cmd_eval, cmd_generate, cmd_synth, cmd_train

COMMANDS = ('synth', 'train', 'generate', 'eval', 'check')
LOG_FILE = 'run.log'


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='manifold-glow',
        description='Flow-based generative models for manifold-valued fields',
    )
    parser.add_argument('command', choices=COMMANDS, help='Command to run')
    parser.add_argument(
        '--config', type=str, required=True, help='Path to the YAML run config'
    )
    parser.add_argument('--seed', type=int, default=None, help='Global seed')
    parser.add_argument(
        '--threads', type=int, default=None, help='Upper bound on torch threads'
    )
    parser.add_argument('--out', type=str, default=None, help='Output directory')
    parser.add_argument(
        '--temperature',
        type=float,
        default=None,
        help='Sampling temperature (generate: the only one; eval: replaces the list)',
    )
    parser.add_argument(
        '--resume', type=str, default=None, help='Checkpoint to resume training from'
    )
    parser.add_argument(
        '--checkpoint',
        type=str,
        default=None,
        help='Checkpoint for generate/eval (default: <out>/checkpoint.mgck)',
    )
    parser.add_argument(
        '--inputs',
        type=str,
        default=None,
        help='Directory of source field files for generate',
    )
    parser.add_argument(
        '--inject-fault',
        type=str,
        default=None,
        choices=['scale_clamp'],
        help='Fault the check command must detect',
    )
    return parser


def overrides_from(args: argparse.Namespace) -> Dict[str, Any]:
    return {
        'seed': args.seed,
        'threads': args.threads,
        'out_dir': args.out,
        'eval.temperatures': None if args.temperature is None else [args.temperature],
        'check.inject_fault': args.inject_fault,
    }


def run(args: argparse.Namespace) -> None:
    config = load_config(args.config, overrides_from(args))
    os.makedirs(config.out_dir, exist_ok=True)
    handler = get_file_handler(os.path.join(config.out_dir, LOG_FILE))
    logger.addHandler(handler)
    try:
        torch.set_num_threads(config.threads)
        config.save(config.out_dir)
        if args.command == 'synth':
            cmd_synth(config)
        elif args.command == 'train':
            cmd_train(config, args.resume)
        elif args.command == 'generate':
            cmd_generate(config, args.checkpoint, args.temperature, args.inputs)
        elif args.command == 'eval':
            cmd_eval(config, args.checkpoint)
        else:
            cmd_check(config)
    finally:
        logger.removeHandler(handler)
        handler.close()


def main(argv: Optional[List[str]] = None) -> int:
    """Console entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)
    try:
        run(args)
    except (ManifoldGlowError, ValueError, OSError) as e:
        logger.error(f'{args.command} failed: {e}', extra={'msg_type': 'ERROR'})
        return exit_code_for(e)
    return 0


if __name__ == '__main__':
    raise SystemExit(main())
