"""Service de registro das execuções."""

from __future__ import annotations

import logging
from typing import Any, Iterable, Mapping

from django.db import transaction

from core.models.runs import ExecucaoCenario, RelatorioMetricas
from core.services.metrics_service import MetricsReport

logger = logging.getLogger(__name__)


def _serializavel(valores: Mapping[str, Any]) -> dict[str, Any]:
    return {
        chave: list(valor) if isinstance(valor, tuple) else valor
        for chave, valor in valores.items()
    }


class RunRegistryService:
    """Persiste execuções e seus relatórios de métricas.

    Uma execução com erro também é registrada, com o status correspondente
    e a mensagem da exceção.
    """

    @classmethod
    @transaction.atomic
    def registrar_execucao(
        cls,
        comando: str,
        *,
        modelo: str = "",
        config_path: str = "",
        parametros: Mapping[str, Any] | None = None,
        diretorio_saida: str = "",
        status: str = ExecucaoCenario.Status.OK,
        mensagem: str = "",
        relatorios: Iterable[tuple[str, MetricsReport]] = (),
    ) -> ExecucaoCenario:
        execucao = ExecucaoCenario.objects.create(
            comando=comando,
            modelo=modelo,
            config_path=config_path,
            parametros=_serializavel(parametros or {}),
            diretorio_saida=diretorio_saida,
            status=status,
            mensagem=mensagem,
        )
        for rotulo, relatorio in relatorios:
            RelatorioMetricas.objects.create(execucao=execucao, rotulo=rotulo, **relatorio.as_dict())

        logger.debug("Execução %s registrada (%s)", execucao.pk, status)
        return execucao

    @classmethod
    def listar_recentes(cls, limite: int = 10) -> list[ExecucaoCenario]:
        if limite < 1:
            return []
        return list(
            ExecucaoCenario.objects.prefetch_related("relatorios").all()[:limite]
        )
