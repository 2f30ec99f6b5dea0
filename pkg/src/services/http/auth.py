"""
HTTP API 认证

HTTP_API_TOKEN 非空时，/api/validate、/api/encode、/api/witness 需要 Bearer Token；
/api/health 不需要。
"""

import logging
import secrets
from typing import Optional

from fastapi import Depends, HTTPException, Request
from fastapi.security import HTTPAuthorizationCredentials, HTTPBearer

from config import config

logger = logging.getLogger(__name__)

bearer = HTTPBearer(auto_error=False)


def auth_enabled() -> bool:
    return bool(config.HTTP_API_TOKEN)


def _reject(request: Request, detail: str) -> HTTPException:
    logger.warning(f"[HTTP API] 拒绝 {request.method} {request.url.path}: {detail}")
    return HTTPException(status_code=401, detail=detail, headers={"WWW-Authenticate": "Bearer"})


def verify_token(request: Request,
                 credentials: Optional[HTTPAuthorizationCredentials] = Depends(bearer)) -> bool:
    if not auth_enabled():
        return True
    if credentials is None:
        raise _reject(request, "未提供认证信息")
    if not secrets.compare_digest(credentials.credentials.encode(), config.HTTP_API_TOKEN.encode()):
        raise _reject(request, "无效的 Token")
    return True
