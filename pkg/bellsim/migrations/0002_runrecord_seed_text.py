# Generated by Django 5.2.9 on 2026-10-18 14:40

from django.db import migrations, models


def seeds_to_text(apps, schema_editor):
    RunRecord = apps.get_model('bellsim', 'RunRecord')
    for record in RunRecord.objects.filter(seed__isnull=True):
        record.seed = ''
        record.save(update_fields=['seed'])


class Migration(migrations.Migration):

    dependencies = [
        ('bellsim', '0001_initial'),
    ]

    operations = [
        migrations.AlterField(
            model_name='runrecord',
            name='seed',
            field=models.CharField(blank=True, max_length=20, null=True),
        ),
        migrations.RunPython(seeds_to_text, migrations.RunPython.noop),
        migrations.AlterField(
            model_name='runrecord',
            name='seed',
            field=models.CharField(blank=True, default='', max_length=20),
        ),
    ]
