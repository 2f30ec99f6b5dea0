"""
路由模块
"""

from . import health, networks, plans

__all__ = ["health", "networks", "plans"]
