"""Recalcula métricas de um traço gravado ou lista o histórico de execuções."""

from django.core.management.base import BaseCommand, CommandError

from core.cli import CliStyler, LabCli


class Command(BaseCommand):
    help = "Métricas de um traço CSV (--trace) ou histórico das últimas execuções (--historico)"

    def add_arguments(self, parser):
        grupo = parser.add_mutually_exclusive_group()
        grupo.add_argument("--trace", help="CSV gravado pelo comando sim")
        grupo.add_argument(
            "--historico",
            type=int,
            metavar="N",
            help="Lista as N execuções mais recentes",
        )
        parser.add_argument("--B", type=float, dest="B", help="Capacidade do gargalo (pacotes/RTT)")
        parser.add_argument("--out", help="Diretório para metricas.txt e metricas.csv")
        parser.add_argument("--quiet", action="store_true")

    def handle(self, *args, **options):
        styler = CliStyler(
            success=self.style.SUCCESS,
            error=self.style.ERROR,
            warning=self.style.WARNING,
        )
        cli = LabCli(writer=self.stdout.write, styler=styler, quiet=options["quiet"])

        if options["historico"] is not None:
            cli.listar_historico(options["historico"])
        elif options["trace"]:
            cli.executar_metrics(options["trace"], options["B"], options["out"])
        else:
            raise CommandError("Informe --trace ou --historico", returncode=2)
