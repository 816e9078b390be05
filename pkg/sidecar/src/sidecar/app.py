"""HTTP service exposing the generation and NLI wire protocols.

Endpoints:
  POST /generate  {source, max_new_tokens} -> {text}
  POST /nli       {premise, hypothesis}    -> {label, scores}
  GET  /healthz                            -> model identifiers
"""

from __future__ import annotations

from dataclasses import dataclass

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .generation import GenerationModel
from .nli import load_nli


@dataclass
class ServiceConfig:
    generation_checkpoint: str
    nli_model: str | None = None
    host: str = "127.0.0.1"
    port: int = 8000
    max_batch_size: int = 8
    max_new_tokens_cap: int = 128

    def __post_init__(self) -> None:
        if self.max_new_tokens_cap < 1:
            raise ValueError("max_new_tokens_cap must be at least 1")
        if self.max_batch_size < 1:
            raise ValueError("max_batch_size must be at least 1")


class GenerateRequest(BaseModel):
    source: str
    max_new_tokens: int


class GenerateResponse(BaseModel):
    text: str


class NliRequest(BaseModel):
    premise: str
    hypothesis: str


class NliResponse(BaseModel):
    label: str
    scores: list[float]


def create_app(config: ServiceConfig) -> FastAPI:
    generator = GenerationModel.load(config.generation_checkpoint)
    nli = load_nli(config.nli_model)

    app = FastAPI(title="rcpipe-sidecar")

    @app.get("/healthz")
    def healthz() -> dict:
        return {
            "status": "ok",
            "generation_model": generator.identifier,
            "nli_model": nli.identifier,
        }

    @app.post("/generate", response_model=GenerateResponse)
    def generate(request: GenerateRequest) -> GenerateResponse:
        if not request.source.strip():
            raise HTTPException(status_code=422, detail="source must be non-empty")
        if request.max_new_tokens < 1:
            raise HTTPException(status_code=422, detail="max_new_tokens must be at least 1")
        if request.max_new_tokens > config.max_new_tokens_cap:
            raise HTTPException(
                status_code=422,
                detail=f"max_new_tokens exceeds the service cap of {config.max_new_tokens_cap}",
            )
        return GenerateResponse(text=generator.generate(request.source, request.max_new_tokens))

    @app.post("/nli", response_model=NliResponse)
    def nli_endpoint(request: NliRequest) -> NliResponse:
        if not request.hypothesis.strip():
            raise HTTPException(status_code=422, detail="hypothesis must be non-empty")
        if not request.premise.strip():
            raise HTTPException(status_code=422, detail="premise must be non-empty")
        label, scores = nli.judge(request.premise, request.hypothesis)
        return NliResponse(label=label, scores=scores)

    return app
