"""Roda o simulador de pacotes na topologia haltere."""

from core.cli import LabCommand


class Command(LabCommand):
    help = "Simula o protocolo em nível de pacote e grava traço, parâmetros e métricas"

    def handle(self, *args, **options):
        cli = self.criar_cli(options)
        cli.executar_sim(options["config"], options["overrides"], options["out"])
