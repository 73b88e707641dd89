"""Integra o modelo fluido (ETTBICC ou TTBICC) a partir de um cenário."""

from core.cli import LabCommand


class Command(LabCommand):
    help = "Integra o modelo fluido e grava trajetória, parâmetros e métricas"

    def handle(self, *args, **options):
        cli = self.criar_cli(options)
        cli.executar_fluid(options["config"], options["overrides"], options["out"])
