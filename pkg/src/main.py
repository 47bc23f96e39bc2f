import logging
from contextlib import asynccontextmanager
from pathlib import Path
from typing import Any, Dict, List, Optional

from fastapi import Depends, FastAPI, HTTPException
from fastapi.concurrency import run_in_threadpool
from pydantic import BaseModel, Field

from .config import Config, configure_logging
from .errors import ConfigError, LabError
from .experiments import SUBCOMMANDS, ExperimentRunner, PipelineResult, RunOptions, validate_config, write_result

logger = logging.getLogger(__name__)


class ExperimentRequest(BaseModel):
    config: Dict[str, Any]
    seed: int = Field(default=Config.DEFAULT_SEED, ge=0, lt=2**64)
    replications: Optional[int] = Field(default=None, gt=0)
    t_grid: Optional[List[float]] = None
    write_files: bool = False


class ExperimentResponse(BaseModel):
    name: str
    passed: bool
    columns: List[str]
    rows: List[List[str]]
    report: str
    derived: Dict[str, str]


class ExperimentService:
    def __init__(self, config: Optional[Config] = None):
        try:
            self.config = config or Config()
            logger.info(f"Experiment service ready: {self.config.WORKERS} worker(s), results in {self.config.RESULTS_DIR}")
        except Exception as e:
            logger.error(f"Failed to initialize the experiment service: {str(e)}")
            raise

    def run(self, name: str, request: ExperimentRequest) -> PipelineResult:
        logger.info(f"Running {name} with seed {request.seed}")
        config = validate_config(request.config).with_overrides(replications=request.replications, t_grid=request.t_grid)
        runner = ExperimentRunner(config, RunOptions(seed=request.seed, workers=self.config.WORKERS))
        result = runner.run(name)
        if request.write_files:
            write_result(result, Path(self.config.RESULTS_DIR), runner.echo())
        return result


@asynccontextmanager
async def lifespan(app: FastAPI):
    try:
        settings = Config()
        configure_logging(settings.LOG_LEVEL, settings.LOG_JSON)
        app.state.service = ExperimentService(settings)
        logger.info("Application startup complete")
        yield
    except Exception as e:
        logger.error(f"Application startup failed: {str(e)}")
        raise
    finally:
        logger.info("Application shutdown")


app = FastAPI(title="branching-lab", lifespan=lifespan)


async def get_service() -> ExperimentService:
    return app.state.service


@app.get("/health")
async def health_check():
    return {"status": "healthy"}


@app.get("/experiments")
async def list_experiments():
    return {"experiments": list(SUBCOMMANDS)}


@app.post("/experiments/{name}", response_model=ExperimentResponse)
async def run_experiment(name: str, request: ExperimentRequest, service: ExperimentService = Depends(get_service)):
    if name not in SUBCOMMANDS:
        raise HTTPException(status_code=404, detail=f"Unknown experiment {name!r}")
    try:
        result = await run_in_threadpool(service.run, name, request)
    except ConfigError as e:
        raise HTTPException(status_code=422, detail=str(e))
    except LabError as e:
        logger.error(f"Error in experiment endpoint: {str(e)}")
        raise HTTPException(status_code=500, detail=str(e))
    return ExperimentResponse(**result.as_dict())


if __name__ == "__main__":
    import uvicorn

    settings = Config()
    uvicorn.run(app, host=settings.API_HOST, port=settings.API_PORT)
