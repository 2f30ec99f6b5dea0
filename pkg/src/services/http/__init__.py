"""
HTTP API 服务模块
"""

from .server import HTTPServer

__all__ = ["HTTPServer"]
