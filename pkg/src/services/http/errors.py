"""
领域异常到 HTTP 状态码的映射
"""

import logging
from contextlib import contextmanager

from fastapi import HTTPException

from src.automata.errors import NetworkError
from src.planning.errors import ParseError, ProblemError, ResolutionError
from src.services.witness import WitnessError

logger = logging.getLogger(__name__)


@contextmanager
def http_errors():
    """解析错误 → 400，语义错误与计划无效 → 422，其余 → 500"""
    try:
        yield
    except HTTPException:
        raise
    except ParseError as e:
        raise HTTPException(status_code=400, detail=f"输入格式错误: {e}")
    except (ResolutionError, ProblemError, NetworkError) as e:
        raise HTTPException(status_code=422, detail=f"输入语义错误: {e}")
    except WitnessError as e:
        raise HTTPException(status_code=422, detail=f"无法构造见证运行: {e}")
    except Exception as e:
        logger.error(f"[HTTP API] 请求处理失败: {e}", exc_info=True)
        raise HTTPException(status_code=500, detail=f"内部错误: {e}")
