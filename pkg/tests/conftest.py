"""
公共测试夹具：房间/机器人/门/方块示例问题、计划和编码网络
"""

import json
import random
from fractions import Fraction

import pytest

from src.automata.errors import UrgentLocationBlocksDelay
from src.automata.models import Configuration, InternalStep, Network, Run
from src.automata.semantics import delay, successors
from src.planning.io import parse_plan, problem_from_dict
from src.services.encoder import EncodedNetwork, encode
from src.services.witness import build_witness


def _snap(pre=(), add=(), dels=()):
    return {"pre": list(pre), "add": list(add), "del": list(dels)}


def _bound(value, strict=False):
    return {"value": str(value), "strict": strict}


# 机器人 rb2 开门 → rb1 穿门移动 → rb2 拾取方块 → rb2 关门
ROBOTS_PROBLEM = {
    "props": [
        "idle_rb1", "idle_rb2", "closed_d", "open_d",
        "in_rb1_rm1", "in_rb1_rm2", "in_rb2_rm1", "in_b_rm1",
        "holds_rb2_b", "connects_d_rm1_rm2",
    ],
    "actions": [
        {
            "name": "open_door_rb2_d_rm1",
            "start": _snap(pre=["idle_rb2", "closed_d"], dels=["idle_rb2", "closed_d"]),
            "over_all": ["in_rb2_rm1"],
            "end": _snap(add=["idle_rb2", "open_d"]),
            "lower": _bound(3),
            "upper": _bound(3),
        },
        {
            "name": "move_rb1_d_rm1_rm2",
            "start": _snap(pre=["idle_rb1", "in_rb1_rm1", "connects_d_rm1_rm2"], dels=["idle_rb1", "in_rb1_rm1"]),
            "over_all": ["open_d"],
            "end": _snap(add=["idle_rb1", "in_rb1_rm2"]),
            "lower": _bound(2),
            "upper": _bound(5),
        },
        {
            "name": "pick_up_rb2_b_rm1",
            "start": _snap(pre=["idle_rb2", "in_b_rm1"], dels=["idle_rb2", "in_b_rm1"]),
            "over_all": ["in_rb2_rm1"],
            "end": _snap(add=["idle_rb2", "holds_rb2_b"]),
            "lower": _bound(1),
            "upper": _bound(4),
        },
        {
            "name": "close_door_rb2_d_rm1",
            "start": _snap(pre=["idle_rb2", "open_d"], dels=["idle_rb2", "open_d"]),
            "over_all": ["in_rb2_rm1"],
            "end": _snap(add=["idle_rb2", "closed_d"]),
            "lower": _bound(3),
            "upper": _bound(3),
        },
    ],
    "init": ["idle_rb1", "idle_rb2", "closed_d", "in_rb1_rm1", "in_rb2_rm1", "in_b_rm1", "connects_d_rm1_rm2"],
    "goal": ["in_rb1_rm2", "holds_rb2_b", "closed_d"],
}

OPEN_DOOR = "open_door_rb2_d_rm1"
MOVE = "move_rb1_d_rm1_rm2"
PICK_UP = "pick_up_rb2_b_rm1"
CLOSE_DOOR = "close_door_rb2_d_rm1"

# 发生时间点 0, 3, 4, 5, 8, 11
FIG4_PLAN = """# 有效调度
0: (open_door_rb2_d_rm1) [3]
3: (move_rb1_d_rm1_rm2) [5]
4: (pick_up_rb2_b_rm1) [1]
8: (close_door_rb2_d_rm1) [3]
"""

# 拾取在开门结束的同一时刻开始：与开门结束互斥
CLASH_PLAN = """0: (open_door_rb2_d_rm1) [3]
3: (move_rb1_d_rm1_rm2) [5]
3: (pick_up_rb2_b_rm1) [1]
8: (close_door_rb2_d_rm1) [3]
"""

# 手工模拟的状态序列 M_0 … M_6
FIG4_STATES = [
    {"idle_rb1", "idle_rb2", "closed_d", "in_rb1_rm1", "in_rb2_rm1", "in_b_rm1", "connects_d_rm1_rm2"},
    {"idle_rb1", "in_rb1_rm1", "in_rb2_rm1", "in_b_rm1", "connects_d_rm1_rm2"},
    {"in_rb2_rm1", "in_b_rm1", "connects_d_rm1_rm2", "idle_rb2", "open_d"},
    {"in_rb2_rm1", "connects_d_rm1_rm2", "open_d"},
    {"in_rb2_rm1", "connects_d_rm1_rm2", "open_d", "idle_rb2", "holds_rb2_b"},
    {"in_rb2_rm1", "connects_d_rm1_rm2", "holds_rb2_b", "idle_rb1", "in_rb1_rm2"},
    {"in_rb2_rm1", "connects_d_rm1_rm2", "holds_rb2_b", "idle_rb1", "in_rb1_rm2", "idle_rb2", "closed_d"},
]


def internal_labels(enc: EncodedNetwork, steps) -> list:
    """内部迁移的标签，如 se_open_door_rb2_d_rm1"""
    return [enc.label_text(s.automaton, s.transition) for s in steps if isinstance(s, InternalStep)]


def delays_of(run: Run) -> list:
    return [s.delta for s in run.steps if not isinstance(s, InternalStep)]


def random_walk(rng: random.Random, net: Network, q: Configuration, length: int = 30) -> list:
    """从 q 出发随机执行内部迁移和延迟，返回途经的配置"""
    visited = [q]
    for _ in range(length):
        moves = list(successors(net, q))
        if moves and rng.random() < 0.7:
            q = rng.choice(moves)[2]
        else:
            try:
                q = delay(net, q, Fraction(rng.randint(1, 4), rng.randint(1, 3)))
            except UrgentLocationBlocksDelay:
                if not moves:
                    break
                q = rng.choice(moves)[2]
        visited.append(q)
    return visited


@pytest.fixture
def robots_dict():
    return json.loads(json.dumps(ROBOTS_PROBLEM))


@pytest.fixture
def robots_problem():
    return problem_from_dict(ROBOTS_PROBLEM)


@pytest.fixture
def fig4_plan():
    return parse_plan(FIG4_PLAN)


@pytest.fixture
def clash_plan():
    return parse_plan(CLASH_PLAN)


@pytest.fixture
def robots_enc(robots_problem):
    return encode(robots_problem, Fraction(0))


@pytest.fixture
def fig4_run(robots_enc, robots_problem, fig4_plan):
    return build_witness(robots_enc, robots_problem, fig4_plan)


@pytest.fixture
def robots_files(tmp_path):
    """写入问题和计划文件，返回 (目录, 问题路径, 有效计划路径, 冲突计划路径)"""
    problem_path = tmp_path / "robots.json"
    problem_path.write_text(json.dumps(ROBOTS_PROBLEM, indent=2), encoding="utf-8")
    plan_path = tmp_path / "fig4.plan"
    plan_path.write_text(FIG4_PLAN, encoding="utf-8")
    clash_path = tmp_path / "clash.plan"
    clash_path.write_text(CLASH_PLAN, encoding="utf-8")
    return tmp_path, str(problem_path), str(plan_path), str(clash_path)
