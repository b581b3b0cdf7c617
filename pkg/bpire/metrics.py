import prometheus_client
from prometheus_client import REGISTRY, write_to_textfile

DEFAULT_BUCKETS = (
    0.005,
    0.01,
    0.025,
    0.05,
    0.1,
    0.25,
    0.5,
    1.0,
    2.5,
    5.0,
    10.0,
    30.0,
    60.0,
    float('+inf'),
)

# время расчёта одного батча путей
BATCH_LATENCY = prometheus_client.Histogram(
    'bpire_batch_latency_seconds',
    'Wall time of one Monte Carlo batch',
    ['estimator'],
    buckets=DEFAULT_BUCKETS,
)

PATHS_TOTAL = prometheus_client.Counter(
    'bpire_paths_total',
    'Simulated environment paths',
    ['estimator'],
)

BUDGET_EXCEEDED_TOTAL = prometheus_client.Counter(
    'bpire_budget_exceeded_total',
    'Estimates that stopped on the sample budget before reaching the precision goal',
    ['estimator'],
)


def export_metrics(path: str | None) -> None:
    if path:
        write_to_textfile(path, REGISTRY)
