"""fluxqit main entry point.

Usage:
    python -m fluxqit run --config configs/paper.yml
    python -m fluxqit sweep --config configs/sweep_omega.yml --workers 4
    python -m fluxqit budget --config configs/paper.yml
"""

from fluxqit.cli.commands import cli

if __name__ == "__main__":
    cli()
