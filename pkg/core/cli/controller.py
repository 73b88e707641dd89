"""Controlador reutilizável dos comandos do laboratório."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence, TypeVar

from django.conf import settings
from django.core.management.base import CommandError

from core.exceptions import BiccLabError, ConfigError
from core.gateways import export_gateway
from core.gateways.config_gateway import (
    FOODCHAIN_SCHEMA,
    SCENARIO_SCHEMA,
    ConfigSchema,
    load_config,
    parse_overrides,
)
from core.models.runs import ExecucaoCenario
from core.services import scenario_service
from core.services.metrics_service import MetricsReport, report_from_trace
from core.services.run_registry_service import RunRegistryService

logger = logging.getLogger(__name__)

Writer = Callable[[str], None]
Formatter = Callable[[str], str]
T = TypeVar("T")

EXIT_CONFIG = 2
EXIT_NUMERICO = 3


@dataclass
class CliStyler:
    """Funções responsáveis por colorir/formatar mensagens."""

    success: Formatter = staticmethod(lambda msg: msg)
    error: Formatter = staticmethod(lambda msg: msg)
    warning: Formatter = staticmethod(lambda msg: msg)


class LabCli:
    """Executa os subcomandos: lê configuração, roda, exporta e registra.

    Exceções do laboratório viram ``CommandError`` com código de saída 2
    (configuração) ou 3 (falha numérica), depois de registrar a execução
    com o status correspondente.
    """

    def __init__(
        self,
        writer: Optional[Writer] = None,
        styler: Optional[CliStyler] = None,
        quiet: bool = False,
    ) -> None:
        self._writer = writer or print
        self._styler = styler or CliStyler()
        self._quiet = quiet
        if quiet:
            logging.getLogger("core").setLevel(logging.WARNING)

    # ------------------------------------------------------------------ #
    # Utilidades de IO
    # ------------------------------------------------------------------ #
    def _out(self, message: str = "") -> None:
        self._writer(message)

    def _progresso(self, message: str) -> None:
        if not self._quiet:
            self._out(message)

    def print_section(self, title: str, width: int = 60) -> None:
        if self._quiet:
            return
        self._out(f"\n╔{'═' * (width - 2)}╗")
        padding = (width - len(title) - 4) // 2
        self._out(f"║ {' ' * padding}{title}{' ' * (width - len(title) - padding - 4)} ║")
        self._out(f"╚{'═' * (width - 2)}╝")

    def _relatorio(self, report: MetricsReport, rotulo: str = "") -> None:
        prefixo = f"[{rotulo}] " if rotulo else ""
        for chave, valor in report.as_dict().items():
            texto = "not-converged" if valor is None else valor
            self._progresso(f"  {prefixo}{chave:<18} = {texto}")

    # ------------------------------------------------------------------ #
    # Configuração e erros
    # ------------------------------------------------------------------ #
    @staticmethod
    def _resolver_config(caminho: str) -> Path:
        '''Caminhos inexistentes são procurados também entre os cenários embutidos.'''
        direto = Path(caminho)
        if direto.is_file():
            return direto
        embutido = Path(settings.BICC_LAB["SCENARIO_DIR"]) / caminho
        return embutido if embutido.is_file() else direto

    def _carregar(self, caminho: str | None, overrides: Sequence[str],
                  schema: ConfigSchema) -> tuple[dict, str]:
        resolvido = self._resolver_config(caminho) if caminho else None
        config = load_config(resolvido, schema, parse_overrides(overrides))
        return config, str(resolvido or "")

    @staticmethod
    def _saida(out: str | None, comando: str) -> Path:
        return Path(out) if out else Path(settings.BICC_LAB["OUTPUT_DIR"]) / comando

    def _executar(self, comando: str, config_path: str, acao: Callable[[], T]) -> T:
        try:
            return acao()
        except BiccLabError as exc:
            configuracao = isinstance(exc, ConfigError)
            status = (
                ExecucaoCenario.Status.ERRO_CONFIG if configuracao
                else ExecucaoCenario.Status.ERRO_NUMERICO
            )
            RunRegistryService.registrar_execucao(
                comando, config_path=config_path, status=status, mensagem=str(exc)
            )
            self._out(self._styler.error(f"[ERRO] {exc}"))
            raise CommandError(
                str(exc), returncode=EXIT_CONFIG if configuracao else EXIT_NUMERICO
            ) from exc

    # ------------------------------------------------------------------ #
    # Subcomandos
    # ------------------------------------------------------------------ #
    def executar_fluid(self, config: str | None, overrides: Sequence[str] = (),
                       out: str | None = None) -> scenario_service.FluidRun:
        def acao() -> scenario_service.FluidRun:
            cfg, caminho = self._carregar(config, overrides, SCENARIO_SCHEMA)
            self.print_section(f"MODELO FLUIDO {cfg.get('model', 'ettbicc').upper()}")
            execucao = scenario_service.run_fluid_scenario(cfg)

            destino = self._saida(out, "fluid")
            export_gateway.write_trajectory_csv(execucao.trajectory, destino)
            export_gateway.write_params_echo(execucao.echo, destino)
            export_gateway.write_metrics(execucao.report, destino)

            final = execucao.trajectory.final_state
            self._progresso(f"  Estado final: {', '.join(f'{v:.6g}' for v in final)}")
            self._progresso(f"  Resíduo final: {execucao.residual:.3e}")
            if execucao.sweep is not None:
                self._progresso(
                    f"  Varredura: {len(execucao.sweep.results)} partidas, "
                    f"{sum(r.converged for r in execucao.sweep.results)} convergidas, "
                    f"dispersão máxima {float(execucao.sweep.spread.max()):.3e}"
                )
            self._relatorio(execucao.report)

            RunRegistryService.registrar_execucao(
                "fluid", modelo=execucao.model.value, config_path=caminho,
                parametros=execucao.echo, diretorio_saida=str(destino),
                relatorios=[("", execucao.report)],
            )
            self._out(self._styler.success(f"[OK] Saídas em {destino}"))
            return execucao

        return self._executar("fluid", config or "", acao)

    def executar_sim(self, config: str | None, overrides: Sequence[str] = (),
                     out: str | None = None) -> scenario_service.SimRun:
        def acao() -> scenario_service.SimRun:
            cfg, caminho = self._carregar(config, overrides, SCENARIO_SCHEMA)
            self.print_section("SIMULAÇÃO DE PACOTES")
            execucao = scenario_service.run_sim_scenario(cfg)

            destino = self._saida(out, "sim")
            export_gateway.write_trace_csv(execucao.trace, destino)
            export_gateway.write_params_echo(execucao.echo, destino)
            export_gateway.write_metrics(execucao.report, destino)

            self._progresso(f"  Amostras: {len(execucao.trace)}")
            if execucao.rejected_headers:
                self._out(self._styler.warning(
                    f"  [AVISO] {execucao.rejected_headers} cabeçalhos descartados pelos emissores"
                ))
            self._relatorio(execucao.report)

            RunRegistryService.registrar_execucao(
                "sim", modelo="ettbicc", config_path=caminho,
                parametros=execucao.echo, diretorio_saida=str(destino),
                relatorios=[("", execucao.report)],
            )
            self._out(self._styler.success(f"[OK] Saídas em {destino}"))
            return execucao

        return self._executar("sim", config or "", acao)

    def executar_compare(self, configs: Sequence[str], overrides: Sequence[str] = (),
                         out: str | None = None) -> scenario_service.ComparisonRun:
        def acao() -> scenario_service.ComparisonRun:
            if len(configs) != 2:
                raise ConfigError({"config": f"compare exige dois --config, recebidos {len(configs)}"})
            cfg_a, caminho_a = self._carregar(configs[0], overrides, SCENARIO_SCHEMA)
            cfg_b, caminho_b = self._carregar(configs[1], overrides, SCENARIO_SCHEMA)
            rotulos = (Path(caminho_a).stem, Path(caminho_b).stem)

            self.print_section(f"COMPARAÇÃO {rotulos[0]} x {rotulos[1]}")
            execucao = scenario_service.run_comparison(cfg_a, cfg_b, rotulos)
            comparacao = execucao.comparison

            destino = self._saida(out, "compare")
            export_gateway.write_comparison(comparacao, destino)
            for rotulo, corrida in zip(comparacao.labels, execucao.runs):
                export_gateway.write_trajectory_csv(corrida.trajectory, destino, f"trajetoria_{rotulo}.csv")
                export_gateway.write_params_echo(corrida.echo, destino, f"parametros_{rotulo}.txt")
                self._relatorio(corrida.report, rotulo)

            self._out(f"  Veredito: {comparacao.verdict}")
            RunRegistryService.registrar_execucao(
                "compare",
                modelo=" x ".join(c.model.value for c in execucao.runs),
                config_path=f"{caminho_a};{caminho_b}",
                parametros={r: c.echo for r, c in zip(comparacao.labels, execucao.runs)},
                diretorio_saida=str(destino),
                relatorios=list(zip(comparacao.labels, comparacao.reports)),
            )
            self._out(self._styler.success(f"[OK] Saídas em {destino}"))
            return execucao

        return self._executar("compare", ";".join(configs), acao)

    def executar_foodchain(self, config: str | None, overrides: Sequence[str] = (),
                           out: str | None = None) -> scenario_service.FoodChainRun:
        def acao() -> scenario_service.FoodChainRun:
            cfg, caminho = self._carregar(config, overrides, FOODCHAIN_SCHEMA)
            self.print_section(f"CADEIA ALIMENTAR {cfg['model'].upper()}")
            execucao = scenario_service.run_foodchain(cfg)

            destino = self._saida(out, "foodchain")
            export_gateway.write_trajectory_csv(execucao.trajectory, destino)
            export_gateway.write_params_echo(execucao.echo, destino)

            final = execucao.trajectory.final_state
            self._progresso(f"  Estado final: {', '.join(f'{v:.6g}' for v in final)}")
            if execucao.drift is not None:
                self._progresso(f"  Deriva relativa da integral primeira: {execucao.drift:.3e}")

            RunRegistryService.registrar_execucao(
                "foodchain", modelo=execucao.model, config_path=caminho,
                parametros=execucao.echo, diretorio_saida=str(destino),
            )
            self._out(self._styler.success(f"[OK] Saídas em {destino}"))
            return execucao

        return self._executar("foodchain", config or "", acao)

    def executar_metrics(self, trace: str, B: float | None,
                         out: str | None = None) -> MetricsReport:
        def acao() -> MetricsReport:
            if B is None:
                raise ConfigError({"B": "obrigatório para recalcular métricas de um traço"})
            traco = export_gateway.read_trace_csv(trace)
            self.print_section("MÉTRICAS DO TRAÇO")
            relatorio = report_from_trace(
                traco, B,
                settings.BICC_LAB["STEADY_FRACTION"],
                settings.BICC_LAB["CONVERGENCE_BAND"],
            )
            if out:
                export_gateway.write_metrics(relatorio, out)
            self._relatorio(relatorio)
            RunRegistryService.registrar_execucao(
                "metrics", config_path=trace, parametros={"B": B},
                diretorio_saida=out or "", relatorios=[("", relatorio)],
            )
            return relatorio

        return self._executar("metrics", trace, acao)

    def listar_historico(self, limite: int = 10) -> None:
        execucoes = RunRegistryService.listar_recentes(limite)
        if not execucoes:
            self._out(self._styler.warning("Nenhuma execução registrada."))
            return
        self._out(f"{'ID':>4}  {'Comando':<10} {'Modelo':<18} {'Status':<14} Criada em")
        for execucao in execucoes:
            self._out(
                f"{execucao.pk:>4}  {execucao.comando:<10} {execucao.modelo:<18} "
                f"{execucao.status:<14} {execucao.criada_em:%Y-%m-%d %H:%M:%S}"
            )
            for relatorio in execucao.relatorios.all():
                rotulo = relatorio.rotulo or "-"
                self._out(
                    f"        {rotulo}: jain={relatorio.jain:.4f} "
                    f"utilização={relatorio.utilization:.4f} descartes={relatorio.drops}"
                )
