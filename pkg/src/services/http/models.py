"""
HTTP API 数据模型
"""

from typing import Any, Dict, List, Optional
from pydantic import BaseModel


# ============================================================
# 计划验证
# ============================================================

class ValidateRequest(BaseModel):
    """验证计划请求"""
    problem: Dict[str, Any]
    plan: str
    epsilon: Optional[str] = None


class DiagnosticResponse(BaseModel):
    """单条违规诊断"""
    clause: int
    clause_name: str
    time: Optional[str] = None
    steps: List[int] = []
    message: str


class ValidateResponse(BaseModel):
    """验证计划响应"""
    valid: bool
    no_self_overlap: bool
    diagnostics: List[DiagnosticResponse] = []
    first: Optional[DiagnosticResponse] = None


# ============================================================
# 编码
# ============================================================

class EncodeRequest(BaseModel):
    """编码请求"""
    problem: Dict[str, Any]
    epsilon: Optional[str] = None
    format: str = "internal"
    strict_ee_guard: Optional[bool] = None
    own_clock_policy: Optional[str] = None


class EncodeResponse(BaseModel):
    """编码响应"""
    network: Dict[str, Any]
    symbols: Dict[str, Any]
    automata: int
    vars: int
    clocks: int
    locations: int
    transitions: int


# ============================================================
# 见证运行
# ============================================================

class WitnessRequest(BaseModel):
    """构造见证运行请求"""
    problem: Dict[str, Any]
    plan: str
    epsilon: Optional[str] = None


class WitnessResponse(BaseModel):
    """构造见证运行响应"""
    accepted: bool
    steps: int
    run: Dict[str, Any]
    timeline: List[str]
