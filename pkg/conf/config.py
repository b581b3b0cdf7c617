from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    WORKERS: int = 1
    LOG_LEVEL: str = 'info'

    BATCH_SIZE: int = 2**14
    BATCHES_PER_ROUND: int = 8
    SAMPLE_BUDGET: int = 10_000_000

    OUT_DIR: str = 'out'
    METRICS_TEXTFILE: str | None = None

    model_config = SettingsConfigDict(env_prefix='BPIRE_')


settings = Settings()
