"""
计划验证与见证运行路由
"""

import logging
from fractions import Fraction
from typing import Optional

from fastapi import APIRouter, Depends

from config import config
from src.automata.io import run_to_dict
from src.automata.semantics import run_check
from src.planning.errors import ParseError
from src.planning.io import parse_plan, problem_from_dict
from src.planning.semantics import Diagnostic, validate_plan
from src.services.encoder import encode
from src.services.witness import build_witness, timeline
from src.utils.rationals import format_rational, parse_rational

from ..auth import verify_token
from ..errors import http_errors
from ..models import DiagnosticResponse, ValidateRequest, ValidateResponse, WitnessRequest, WitnessResponse

logger = logging.getLogger(__name__)


def request_epsilon(value: Optional[str]) -> Fraction:
    """请求未给出 ε 时使用配置值"""
    try:
        epsilon = parse_rational(value if value is not None else config.EPSILON)
    except ValueError as e:
        raise ParseError(f"epsilon 无效: {e}") from e
    if epsilon < 0:
        raise ParseError(f"epsilon 不能为负: {value}")
    return epsilon


def _diagnostic(d: Diagnostic) -> DiagnosticResponse:
    return DiagnosticResponse(
        clause=int(d.clause),
        clause_name=d.clause.name.lower(),
        time=format_rational(d.time) if d.time is not None else None,
        steps=list(d.steps),
        message=d.message,
    )


def create_routes():
    """创建路由"""
    router = APIRouter()

    @router.post("/api/validate", response_model=ValidateResponse, dependencies=[Depends(verify_token)])
    async def validate(request: ValidateRequest):
        """验证计划"""
        with http_errors():
            problem = problem_from_dict(request.problem, source="problem")
            plan = parse_plan(request.plan, source="plan")
            verdict = validate_plan(problem, plan, request_epsilon(request.epsilon))

        logger.info(f"[HTTP API] 验证计划: {'有效' if verdict else '无效'}, {len(verdict.diagnostics)} 条诊断")
        return ValidateResponse(
            valid=verdict.valid,
            no_self_overlap=verdict.no_self_overlap,
            diagnostics=[_diagnostic(d) for d in verdict.diagnostics],
            first=_diagnostic(verdict.first) if verdict.first else None,
        )

    @router.post("/api/witness", response_model=WitnessResponse, dependencies=[Depends(verify_token)])
    async def witness(request: WitnessRequest):
        """由有效计划构造见证运行并重放"""
        with http_errors():
            problem = problem_from_dict(request.problem, source="problem")
            plan = parse_plan(request.plan, source="plan")
            epsilon = request_epsilon(request.epsilon)
            enc = encode(problem, epsilon, config.STRICT_EE_GUARD, config.OWN_CLOCK_POLICY)
            run = build_witness(enc, problem, plan, epsilon)
            replay = run_check(enc.network, run)

        logger.info(f"[HTTP API] 见证运行: {len(run)} 步, 重放{'通过' if replay else '失败'}")
        return WitnessResponse(
            accepted=replay.accepted,
            steps=len(run),
            run=run_to_dict(run),
            timeline=timeline(enc, run),
        )

    return router
