"""
HTTP API 服务器

validate / encode / witness 三个接口共用 config 中的 ε 和编码变体，
请求体可逐项覆盖。
"""

import logging
import time

from fastapi import FastAPI, Request
import uvicorn

from config import config

from .auth import auth_enabled
from .routes import health, networks, plans

logger = logging.getLogger(__name__)

API_VERSION = "1.0.0"


class HTTPServer:
    """HTTP API 服务器"""

    def __init__(self):
        self.app = FastAPI(
            title="Temporal Plan Validation API",
            description="时序计划验证、时间自动机编码与见证运行",
            version=API_VERSION,
        )
        self.app.middleware("http")(self._log_request)
        for module in (health, plans, networks):
            self.app.include_router(module.create_routes())

    @staticmethod
    async def _log_request(request: Request, call_next):
        started = time.perf_counter()
        response = await call_next(request)
        elapsed = (time.perf_counter() - started) * 1000
        logger.debug(f"[HTTP API] {request.method} {request.url.path} -> {response.status_code} ({elapsed:.1f}ms)")
        return response

    def run(self, host: str = "0.0.0.0", port: int = 8000):
        logger.info(f"启动 HTTP API 服务器: http://{host}:{port}")
        logger.info(
            f"默认参数: ε={config.EPSILON}, ee 守卫={'strict' if config.STRICT_EE_GUARD else 'end'}, "
            f"时钟策略={config.OWN_CLOCK_POLICY}, 认证={'开启' if auth_enabled() else '关闭'}"
        )
        uvicorn.run(self.app, host=host, port=port, log_level="debug" if config.DEBUG else "info")
