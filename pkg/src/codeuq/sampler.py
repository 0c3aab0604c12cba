"""Optional client for sampling K candidate programs from a chat-completion
endpoint.  The rest of the system consumes pre-sampled corpora and never
needs this module; tests run against recorded transports only.
"""

from __future__ import annotations

import json
import os
import re
import time
from dataclasses import dataclass
from pathlib import Path

import httpx

from .corpus import CandidateProgram, Task

_FENCE = re.compile(r"```[a-zA-Z0-9_+-]*\n(.*?)```", re.DOTALL)

DEFAULT_PROMPT = (
    "Write a complete, self-contained {language} solution for the following "
    "programming task. Reply with code only.\n\n{description}"
)


class SamplerError(RuntimeError):
    pass


class HttpError(SamplerError):
    pass


@dataclass(frozen=True)
class SamplerConfig:
    endpoint_url: str
    model_name: str
    temperature: float = 0.6
    k_samples: int = 10
    max_tokens: int = 4096
    api_key_env_var: str = "CODEUQ_API_KEY"
    request_timeout_ms: int = 60_000
    retry_limit: int = 2

    def __post_init__(self):
        if self.k_samples < 1:
            raise ValueError("k_samples must be >= 1")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")


def strip_code_fences(text: str) -> str:
    """Extract code from a fenced block when present, else return as-is."""
    m = _FENCE.search(text)
    if m:
        return m.group(1).strip("\n")
    return text.strip()


def _request_body(task: Task, config: SamplerConfig, prompt_template: str) -> dict:
    prompt = prompt_template.format(language=task.language, description=task.description)
    return {
        "model": config.model_name,
        "messages": [{"role": "user", "content": prompt}],
        "temperature": config.temperature,
        "max_tokens": config.max_tokens,
        "n": 1,
    }


def _post_with_retry(client: httpx.Client, config: SamplerConfig, body: dict) -> httpx.Response:
    last_error: Exception | None = None
    for attempt in range(config.retry_limit + 1):
        if attempt:
            time.sleep(min(2.0, 0.1 * 2**attempt))
        try:
            response = client.post(
                config.endpoint_url,
                json=body,
                timeout=config.request_timeout_ms / 1000.0,
            )
        except httpx.HTTPError as exc:
            last_error = exc
            continue
        if response.status_code >= 500:
            last_error = HttpError(f"server error {response.status_code}")
            continue
        if response.status_code != 200:
            raise HttpError(f"request failed with status {response.status_code}")
        return response
    raise HttpError(f"retries exhausted: {last_error}")


def sample_candidates(
    task: Task,
    config: SamplerConfig,
    *,
    prompt_template: str = DEFAULT_PROMPT,
    client: httpx.Client | None = None,
    archive_dir: str | Path | None = None,
) -> list[CandidateProgram]:
    """Sample K candidates, ranked 1..K in arrival order.

    Rank 1 is the first sample: the output a user would be shown.  Fenced
    code blocks are stripped; an empty completion is recorded as an
    empty-source candidate (which executes to an abnormal outcome) rather
    than raised.  Raw responses are archived per task for replay when
    archive_dir is set.  The API key is read from the configured environment
    variable and never logged.
    """
    api_key = os.environ.get(config.api_key_env_var)
    if client is None:
        if not api_key:
            raise SamplerError(
                f"API key environment variable {config.api_key_env_var!r} is not set"
            )
        client = httpx.Client(headers={"Authorization": f"Bearer {api_key}"})
        owns_client = True
    else:
        owns_client = False

    archive_path = None
    if archive_dir is not None:
        archive_path = Path(archive_dir) / task.task_id
        archive_path.mkdir(parents=True, exist_ok=True)

    candidates: list[CandidateProgram] = []
    try:
        body = _request_body(task, config, prompt_template)
        for rank in range(1, config.k_samples + 1):
            response = _post_with_retry(client, config, body)
            if archive_path is not None:
                (archive_path / f"sample_{rank:02d}.json").write_text(
                    response.text, encoding="utf-8"
                )
            payload = response.json()
            try:
                content = payload["choices"][0]["message"]["content"] or ""
            except (KeyError, IndexError, TypeError):
                content = ""
            candidates.append(
                CandidateProgram(task.task_id, rank, strip_code_fences(content))
            )
    finally:
        if owns_client:
            client.close()
    return candidates
