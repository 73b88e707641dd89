"""Integra um dos modelos clássicos de cadeia alimentar."""

from core.cli import LabCommand


class Command(LabCommand):
    help = "Integra Lotka-Volterra ou a cadeia de três níveis e grava a trajetória"

    def handle(self, *args, **options):
        cli = self.criar_cli(options)
        cli.executar_foodchain(options["config"], options["overrides"], options["out"])
