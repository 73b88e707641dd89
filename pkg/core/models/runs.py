from django.db import models


class ExecucaoCenario(models.Model):
    '''Registro de uma execução de comando do laboratório.'''

    class Status(models.TextChoices):
        OK = "ok", "Concluída"
        ERRO_CONFIG = "erro_config", "Erro de configuração"
        ERRO_NUMERICO = "erro_numerico", "Falha numérica"

    comando = models.CharField(max_length=20)
    modelo = models.CharField(max_length=30, blank=True)
    config_path = models.CharField(max_length=500, blank=True)
    parametros = models.JSONField(default=dict)
    diretorio_saida = models.CharField(max_length=500, blank=True)
    status = models.CharField(max_length=20, choices=Status.choices, default=Status.OK)
    mensagem = models.TextField(blank=True)
    criada_em = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ["-criada_em", "-id"]

    def __str__(self) -> str:
        return f"{self.comando} {self.modelo} ({self.status})"


class RelatorioMetricas(models.Model):
    '''Métricas de uma execução; ``compare`` grava um relatório por rótulo.'''

    execucao = models.ForeignKey(
        ExecucaoCenario,
        on_delete=models.CASCADE,
        related_name="relatorios",
    )
    rotulo = models.CharField(max_length=50, blank=True)
    jain = models.FloatField()
    utilization = models.FloatField()
    convergence_time = models.FloatField(null=True, blank=True)
    oscillation_index = models.FloatField()
    queue_max = models.FloatField()
    queue_mean_steady = models.FloatField()
    drops = models.IntegerField(default=0)

    def __str__(self) -> str:
        return f"{self.execucao_id}/{self.rotulo or '-'}: jain={self.jain:.4f}"
