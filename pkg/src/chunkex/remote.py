"""Shared HTTP plumbing for remote backends.

All remote clients (generator, tagger, embedder, judge) speak JSON over a
single POST endpoint and share one retry policy: transport failures are
retried up to ``retries`` times with exponential backoff, while malformed
payloads and non-retryable HTTP errors surface immediately (retrying a
deterministic failure cannot help).
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import httpx

from .errors import BackendUnavailable, MalformedBackendOutput

_RETRYABLE_STATUS = frozenset({502, 503, 504})

T = TypeVar("T")
R = TypeVar("R")


def post_json(
    client: httpx.Client,
    url: str,
    payload: dict,
    *,
    retries: int = 2,
    backoff: float = 0.25,
) -> dict:
    """POST ``payload`` as JSON and return the decoded JSON response."""
    last_error: Exception | None = None
    for attempt in range(retries + 1):
        try:
            response = client.post(url, json=payload)
        except httpx.TransportError as exc:
            last_error = exc
            if attempt < retries:
                time.sleep(backoff * (2**attempt))
            continue
        if response.status_code in _RETRYABLE_STATUS:
            last_error = BackendUnavailable(f"{url} returned {response.status_code}")
            if attempt < retries:
                time.sleep(backoff * (2**attempt))
            continue
        if response.status_code >= 400:
            raise BackendUnavailable(f"{url} returned {response.status_code}")
        try:
            data = response.json()
        except ValueError as exc:
            raise MalformedBackendOutput(None, "response body is not JSON") from exc
        if not isinstance(data, dict):
            raise MalformedBackendOutput(None, "response body is not a JSON object")
        return data
    raise BackendUnavailable(f"{url} unreachable after {retries + 1} attempts: {last_error}")


def iter_batches(items: Sequence[T], size: int) -> list[Sequence[T]]:
    """Slice ``items`` into consecutive batches of at most ``size``."""
    if size < 1:
        raise ValueError(f"batch size must be positive, got {size}")
    return [items[i : i + size] for i in range(0, len(items), size)]


def run_batches(
    batches: Sequence[T],
    fn: Callable[[T], R],
    max_in_flight: int = 1,
) -> list[R]:
    """Apply ``fn`` to each batch, at most ``max_in_flight`` concurrently.

    Results come back in input order regardless of completion order, so the
    caller can reassemble per-item outputs positionally.
    """
    if max_in_flight <= 1 or len(batches) <= 1:
        return [fn(batch) for batch in batches]
    with ThreadPoolExecutor(max_workers=max_in_flight) as pool:
        return list(pool.map(fn, batches))
