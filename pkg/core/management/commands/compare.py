"""Compara dois cenários fluidos (tipicamente ETTBICC x TTBICC)."""

from core.cli import LabCommand


class Command(LabCommand):
    help = "Roda dois cenários (--config duas vezes) e grava métricas lado a lado e o veredito"
    config_repetido = True

    def handle(self, *args, **options):
        cli = self.criar_cli(options)
        cli.executar_compare(options["config"] or [], options["overrides"], options["out"])
