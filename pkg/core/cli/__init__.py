"""Ferramentas compartilhadas para a CLI do laboratório."""

from .controller import CliStyler, LabCli
from .comando_base import LabCommand

__all__ = ["CliStyler", "LabCli", "LabCommand"]
