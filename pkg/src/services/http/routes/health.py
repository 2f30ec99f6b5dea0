"""
健康检查路由（不需要认证）
"""

from datetime import datetime

from fastapi import APIRouter

from config import config

from ..auth import auth_enabled


def create_routes():
    router = APIRouter()

    @router.get("/api/health")
    async def health():
        from ..server import API_VERSION

        return {
            "status": "healthy",
            "version": API_VERSION,
            "server_time": datetime.now().isoformat(timespec="seconds"),
            "auth_enabled": auth_enabled(),
            "defaults": {
                "epsilon": config.EPSILON,
                "strict_ee_guard": config.STRICT_EE_GUARD,
                "own_clock_policy": config.OWN_CLOCK_POLICY,
            },
        }

    return router
