"""Minimal JSON-over-POST helper with retry/backoff, shared by the remote
denoiser client and the judge client. Tests inject a fake ``transport``."""

from __future__ import annotations

import json
import time
import urllib.error
import urllib.request
from typing import Callable

from .errors import RemoteError

# transport(url, body_bytes, headers, timeout) -> response bytes
Transport = Callable[[str, bytes, dict, float], bytes]


def _urllib_transport(url: str, body: bytes, headers: dict, timeout: float) -> bytes:
    request = urllib.request.Request(url, data=body, headers=headers, method="POST")
    with urllib.request.urlopen(request, timeout=timeout) as response:
        return response.read()


def post_json(
    url: str,
    payload: dict,
    *,
    token: str | None = None,
    timeout: float = 30.0,
    retries: int = 2,
    backoff: float = 0.25,
    transport: Transport | None = None,
) -> dict:
    """POST a JSON payload and decode a JSON response.

    Network failures are retried ``retries`` times with exponentially growing
    sleeps; after that (or on a non-JSON response) ``RemoteError`` is raised.
    """
    transport = transport or _urllib_transport
    body = json.dumps(payload).encode("utf-8")
    headers = {"Content-Type": "application/json"}
    if token:
        headers["Authorization"] = f"Bearer {token}"
    delay = backoff
    last_error: Exception | None = None
    for attempt in range(retries + 1):
        try:
            raw = transport(url, body, headers, timeout)
            break
        except (urllib.error.URLError, OSError, ConnectionError) as exc:
            last_error = exc
            if attempt == retries:
                raise RemoteError(f"request to {url} failed after {retries + 1} attempts: {exc}")
            time.sleep(delay)
            delay *= 2
    else:  # pragma: no cover - loop always breaks or raises
        raise RemoteError(f"request to {url} failed: {last_error}")
    try:
        return json.loads(raw.decode("utf-8"))
    except (ValueError, UnicodeDecodeError) as exc:
        raise RemoteError(f"{url} returned a non-JSON response: {exc}")
