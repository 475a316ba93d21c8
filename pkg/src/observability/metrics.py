import os
import sys
from opentelemetry import metrics
from opentelemetry.sdk.resources import Resource
from opentelemetry.sdk.metrics import MeterProvider
from opentelemetry.sdk.metrics.export import PeriodicExportingMetricReader, ConsoleMetricExporter
from opentelemetry.sdk.metrics.view import View, ExplicitBucketHistogramAggregation

from src.config import select_config

SERVICE_NAME = "spce-lab"

_INITIALIZED = False
_PROVIDER: MeterProvider | None = None


def init_metrics(export_interval_sec: int = 10):
    global _INITIALIZED, _PROVIDER
    if _INITIALIZED:
        return

    config = select_config()
    resource = Resource.create({
        "service.name": SERVICE_NAME,
        "deployment.environment": os.getenv("LAB_ENV", "dev"),
    })

    readers = []
    endpoint = config.OTEL_EXPORTER_OTLP_ENDPOINT
    if endpoint:
        from opentelemetry.exporter.otlp.proto.http.metric_exporter import OTLPMetricExporter

        metrics_endpoint = endpoint.rstrip("/") + "/v1/metrics"
        print("[otel] resolved metrics exporter endpoint:", metrics_endpoint, file=sys.stderr)
        readers.append(PeriodicExportingMetricReader(
            OTLPMetricExporter(endpoint=metrics_endpoint),
            export_interval_millis=export_interval_sec * 1000,
        ))
    if config.OTEL_CONSOLE:
        readers.append(PeriodicExportingMetricReader(
            ConsoleMetricExporter(out=sys.stderr),
            export_interval_millis=export_interval_sec * 1000,
        ))

    # Fit evaluations range from sub-millisecond (exact path) to tens of
    # seconds (10^6 trials on an 8x8 grid).
    views = [
        View(
            instrument_name="fit_evaluation_seconds",
            aggregation=ExplicitBucketHistogramAggregation(
                boundaries=[0.001, 0.01, 0.1, 0.5, 1, 5, 10, 30, 60]
            ),
        )
    ]

    provider = MeterProvider(resource=resource, metric_readers=readers, views=views)
    metrics.set_meter_provider(provider)
    _PROVIDER = provider
    _INITIALIZED = True


def force_flush(timeout_millis: int = 3000):
    if not _INITIALIZED or _PROVIDER is None:
        return
    try:
        _PROVIDER.force_flush(timeout_millis=timeout_millis)
    except Exception:
        pass


def get_meter():
    return metrics.get_meter(SERVICE_NAME)
