"""Base dos management commands do laboratório."""

from __future__ import annotations

from django.core.management.base import BaseCommand

from .controller import CliStyler, LabCli


class LabCommand(BaseCommand):
    '''Adiciona ``--config``, ``--out``, ``--set`` e ``--quiet`` e monta o LabCli.'''

    config_repetido = False

    def add_arguments(self, parser):
        parser.add_argument(
            "--config",
            action="append" if self.config_repetido else "store",
            help="Arquivo de cenário (chave = valor); busca também em core/scenarios/",
        )
        parser.add_argument(
            "--out",
            help="Diretório de saída (padrão: BICC_LAB['OUTPUT_DIR']/<comando>)",
        )
        parser.add_argument(
            "--set",
            action="append",
            default=[],
            dest="overrides",
            metavar="CHAVE=VALOR",
            help="Sobrescreve uma chave do arquivo (repetível)",
        )
        parser.add_argument(
            "--quiet",
            action="store_true",
            help="Somente avisos, erros e o resultado final",
        )

    def criar_cli(self, options) -> LabCli:
        styler = CliStyler(
            success=self.style.SUCCESS,
            error=self.style.ERROR,
            warning=self.style.WARNING,
        )
        return LabCli(writer=self.stdout.write, styler=styler, quiet=options["quiet"])
