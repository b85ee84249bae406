# Generated by Django 5.2.9 on 2026-10-18 10:12

import django.utils.timezone
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='RunRecord',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('command', models.CharField(db_index=True, max_length=32)),
                ('config_digest', models.CharField(blank=True, db_index=True, max_length=64)),
                ('physics_digest', models.CharField(blank=True, db_index=True, max_length=64)),
                ('seed', models.BigIntegerField(blank=True, null=True)),
                ('tool_version', models.CharField(max_length=32)),
                ('started_at', models.DateTimeField(default=django.utils.timezone.now)),
                ('finished_at', models.DateTimeField(blank=True, null=True)),
                ('inputs', models.JSONField(blank=True, default=list)),
                ('outputs', models.JSONField(blank=True, default=list)),
                ('manifest_path', models.CharField(blank=True, max_length=1024)),
            ],
            options={
                'verbose_name': 'Run Record',
                'verbose_name_plural': 'Run Records',
                'ordering': ['-started_at'],
                'indexes': [models.Index(fields=['command', 'started_at'], name='bellsim_run_command_idx')],
            },
        ),
    ]
