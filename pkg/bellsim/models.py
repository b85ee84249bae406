from django.db import models
from django.utils import timezone


class RunRecord(models.Model):
    """
    One row per command invocation that produced output files
    The files and their manifests stay the source of truth; this table
    indexes them by digest for lookup.
    """
    command = models.CharField(max_length=32, db_index=True)
    config_digest = models.CharField(max_length=64, blank=True, db_index=True)
    physics_digest = models.CharField(max_length=64, blank=True, db_index=True)
    # Decimal text: seeds span the full unsigned 64-bit range
    seed = models.CharField(max_length=20, blank=True, default='')
    tool_version = models.CharField(max_length=32)
    started_at = models.DateTimeField(default=timezone.now)
    finished_at = models.DateTimeField(null=True, blank=True)
    inputs = models.JSONField(default=list, blank=True)
    outputs = models.JSONField(default=list, blank=True)
    manifest_path = models.CharField(max_length=1024, blank=True)

    class Meta:
        ordering = ['-started_at']
        verbose_name = 'Run Record'
        verbose_name_plural = 'Run Records'
        indexes = [
            models.Index(fields=['command', 'started_at'], name='bellsim_run_command_idx'),
        ]

    def __str__(self):
        return f"{self.command} {self.config_digest[:12]} ({self.started_at:%Y-%m-%d %H:%M:%S})"
