from django.test import TestCase

from core.models.runs import ExecucaoCenario, RelatorioMetricas
from core.services.metrics_service import MetricsReport
from core.services.run_registry_service import RunRegistryService

RELATORIO = MetricsReport(
    jain=0.99, utilization=0.98, convergence_time=None, oscillation_index=0.1,
    queue_max=3.0, queue_mean_steady=0.5, drops=0,
)


class RunRegistryServiceTestCase(TestCase):

    def test_registra_execucao_com_relatorios(self):
        """Tuplas viram listas no JSON e cada relatório vira uma linha."""
        # Arrange
        parametros = {"B": 50.0, "initial_W": (1.0, 2.0)}

        # Act
        execucao = RunRegistryService.registrar_execucao(
            "compare", modelo="ettbicc x ttbicc", parametros=parametros,
            relatorios=[("a", RELATORIO), ("b", RELATORIO)],
        )

        # Assert
        execucao.refresh_from_db()
        self.assertEqual(execucao.parametros, {"B": 50.0, "initial_W": [1.0, 2.0]})
        self.assertEqual(execucao.status, ExecucaoCenario.Status.OK)
        self.assertEqual(
            sorted(execucao.relatorios.values_list("rotulo", flat=True)), ["a", "b"]
        )
        self.assertIsNone(RelatorioMetricas.objects.first().convergence_time)

    def test_execucao_com_erro(self):
        execucao = RunRegistryService.registrar_execucao(
            "sim", status=ExecucaoCenario.Status.ERRO_NUMERICO, mensagem="t=3.5"
        )
        self.assertEqual(execucao.relatorios.count(), 0)
        self.assertEqual(str(execucao), "sim  (erro_numerico)")

    def test_listar_recentes_em_ordem_decrescente(self):
        for comando in ("fluid", "sim", "foodchain"):
            RunRegistryService.registrar_execucao(comando)

        recentes = RunRegistryService.listar_recentes(2)

        self.assertEqual([e.comando for e in recentes], ["foodchain", "sim"])
        self.assertEqual(RunRegistryService.listar_recentes(0), [])
