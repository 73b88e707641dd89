# Generated by Django 5.2.8 on 2026-10-18 10:12

import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ExecucaoCenario',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('comando', models.CharField(max_length=20)),
                ('modelo', models.CharField(blank=True, max_length=30)),
                ('config_path', models.CharField(blank=True, max_length=500)),
                ('parametros', models.JSONField(default=dict)),
                ('diretorio_saida', models.CharField(blank=True, max_length=500)),
                ('status', models.CharField(choices=[('ok', 'Concluída'), ('erro_config', 'Erro de configuração'), ('erro_numerico', 'Falha numérica')], default='ok', max_length=20)),
                ('mensagem', models.TextField(blank=True)),
                ('criada_em', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'ordering': ['-criada_em', '-id'],
            },
        ),
        migrations.CreateModel(
            name='RelatorioMetricas',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('rotulo', models.CharField(blank=True, max_length=50)),
                ('jain', models.FloatField()),
                ('utilization', models.FloatField()),
                ('convergence_time', models.FloatField(blank=True, null=True)),
                ('oscillation_index', models.FloatField()),
                ('queue_max', models.FloatField()),
                ('queue_mean_steady', models.FloatField()),
                ('drops', models.IntegerField(default=0)),
                ('execucao', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='relatorios', to='core.execucaocenario')),
            ],
        ),
    ]
