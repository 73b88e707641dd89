from django.contrib import admin
from .models.runs import ExecucaoCenario, RelatorioMetricas


class RelatorioMetricasInline(admin.TabularInline):
    model = RelatorioMetricas
    extra = 0


@admin.register(ExecucaoCenario)
class ExecucaoCenarioAdmin(admin.ModelAdmin):
    list_display = ("id", "comando", "modelo", "status", "criada_em")
    list_filter = ("comando", "status")
    search_fields = ("config_path", "mensagem")
    inlines = [RelatorioMetricasInline]


@admin.register(RelatorioMetricas)
class RelatorioMetricasAdmin(admin.ModelAdmin):
    list_display = ("id", "execucao", "rotulo", "jain", "utilization", "drops")
    list_filter = ("execucao__comando",)
