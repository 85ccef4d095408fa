"""Minimal HS256 JSON Web Tokens (header.payload.signature, base64url).

Only what the label-report endpoint needs: symmetric signing, constant-time
verification, expiry and required-claim checks. Tokens from other algorithms
are rejected outright.
"""

from __future__ import annotations

import base64
import hashlib
import hmac
import json
import time
from typing import Any, Optional


class TokenError(Exception):
    """Signature, structure, expiry or claim validation failed."""


def _b64url_encode(data: bytes) -> str:
    return base64.urlsafe_b64encode(data).rstrip(b"=").decode("ascii")


def _b64url_decode(text: str) -> bytes:
    padding = -len(text) % 4
    try:
        return base64.urlsafe_b64decode(text + "=" * padding)
    except (ValueError, TypeError):
        raise TokenError("invalid base64url segment")


def encode(claims: dict[str, Any], secret: str) -> str:
    header = {"alg": "HS256", "typ": "JWT"}
    head = _b64url_encode(json.dumps(header, separators=(",", ":")).encode())
    body = _b64url_encode(json.dumps(claims, separators=(",", ":")).encode())
    signing_input = f"{head}.{body}".encode("ascii")
    signature = hmac.new(secret.encode(), signing_input, hashlib.sha256).digest()
    return f"{head}.{body}.{_b64url_encode(signature)}"


def decode(
    token: str,
    secret: str,
    required_claims: tuple[str, ...] = ("sub", "role", "exp"),
    now: Optional[float] = None,
) -> dict[str, Any]:
    parts = token.split(".")
    if len(parts) != 3:
        raise TokenError("token must have three segments")
    head_raw, body_raw, sig_raw = parts

    signing_input = f"{head_raw}.{body_raw}".encode("ascii")
    expected = hmac.new(secret.encode(), signing_input, hashlib.sha256).digest()
    if not hmac.compare_digest(expected, _b64url_decode(sig_raw)):
        raise TokenError("signature mismatch")

    try:
        header = json.loads(_b64url_decode(head_raw))
        claims = json.loads(_b64url_decode(body_raw))
    except (json.JSONDecodeError, UnicodeDecodeError):
        raise TokenError("malformed token segments")
    if not isinstance(header, dict) or header.get("alg") != "HS256":
        raise TokenError("unsupported algorithm")
    if not isinstance(claims, dict):
        raise TokenError("claims must be an object")

    for claim in required_claims:
        if claim not in claims:
            raise TokenError(f"missing claim {claim!r}")
    if "exp" in claims:
        try:
            expiry = float(claims["exp"])
        except (TypeError, ValueError):
            raise TokenError("exp claim is not numeric")
        if expiry <= (time.time() if now is None else now):
            raise TokenError("token expired")
    return claims
