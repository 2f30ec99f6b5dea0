"""
编码路由
"""

import json
import logging

from fastapi import APIRouter, Depends, HTTPException

from config import config
from src.planning.io import problem_from_dict
from src.services.encoder import ExportFormat, OwnClockPolicy, encode, export_network, symbols_to_dict

from ..auth import verify_token
from ..errors import http_errors
from ..models import EncodeRequest, EncodeResponse
from .plans import request_epsilon

logger = logging.getLogger(__name__)


def create_routes():
    """创建路由"""
    router = APIRouter()

    @router.post("/api/encode", response_model=EncodeResponse, dependencies=[Depends(verify_token)])
    async def encode_problem(request: EncodeRequest):
        """把规划问题编码为时间自动机网络"""
        try:
            fmt = ExportFormat(request.format)
            policy = OwnClockPolicy(request.own_clock_policy or config.OWN_CLOCK_POLICY)
        except ValueError as e:
            raise HTTPException(status_code=400, detail=f"参数无效: {e}")

        strict = config.STRICT_EE_GUARD if request.strict_ee_guard is None else request.strict_ee_guard
        with http_errors():
            problem = problem_from_dict(request.problem, source="problem")
            enc = encode(problem, request_epsilon(request.epsilon), strict, policy)
            exported = json.loads(export_network(enc, fmt))

        net = enc.network
        logger.info(f"[HTTP API] 编码完成: {len(net.automata)} 个自动机, 格式 {fmt.value}")
        return EncodeResponse(
            network=exported,
            symbols=symbols_to_dict(enc),
            automata=len(net.automata),
            vars=len(net.vars),
            clocks=len(net.clocks),
            locations=net.location_count,
            transitions=net.transition_count,
        )

    return router
