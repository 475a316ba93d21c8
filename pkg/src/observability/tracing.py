import os
import sys
from opentelemetry import trace
from opentelemetry.sdk.resources import Resource
from opentelemetry.sdk.trace import TracerProvider
from opentelemetry.sdk.trace.export import BatchSpanProcessor, ConsoleSpanExporter
from opentelemetry.sdk.trace.sampling import TraceIdRatioBased, ParentBased

from src.config import select_config
from src.observability.metrics import SERVICE_NAME

_INITIALIZED = False


def init_tracing(
    service_name: str = SERVICE_NAME,
    console: bool | None = None,
    sample_ratio: float = 1.0
):
    global _INITIALIZED
    if _INITIALIZED:
        return

    config = select_config()
    resource = Resource.create({
        "service.name": service_name,
        "deployment.environment": os.getenv("LAB_ENV", "dev")
    })

    sampler = ParentBased(TraceIdRatioBased(sample_ratio))
    provider = TracerProvider(resource=resource, sampler=sampler)
    trace.set_tracer_provider(provider)

    endpoint = config.OTEL_EXPORTER_OTLP_ENDPOINT
    if endpoint:
        from opentelemetry.exporter.otlp.proto.http.trace_exporter import OTLPSpanExporter

        otlp_exporter = OTLPSpanExporter(endpoint=endpoint.rstrip("/") + "/v1/traces")
        print("[otel] resolved exporter endpoint:", otlp_exporter._endpoint, file=sys.stderr)
        provider.add_span_processor(BatchSpanProcessor(otlp_exporter))

    if console if console is not None else config.OTEL_CONSOLE:
        provider.add_span_processor(BatchSpanProcessor(ConsoleSpanExporter(out=sys.stderr)))

    _INITIALIZED = True


def get_tracer():
    return trace.get_tracer(SERVICE_NAME)
